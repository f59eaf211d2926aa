#pragma once

#include <cema/index.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cema {

enum class TimelineMode { raw, per_million, cumulative };

std::string to_string(TimelineMode m);
TimelineMode parse_timeline_mode(std::string_view s);

/// Per-slice occurrence counts of a lemma set. All three series are always
/// filled; the mode only picks the plotted one.
struct Timeline {
    std::vector<std::string> labels;
    std::vector<std::uint64_t> counts;
    std::vector<std::uint64_t> tokens;
    std::vector<double> per_million; // 0 for slices without tokens
    std::vector<std::uint64_t> cumulative;
    std::vector<std::string> absent; // requested lemmas missing from the vocabulary

    std::vector<double> series(TimelineMode mode) const;
};

/// Summed counts over `lemmas`. An empty plan is a DataError.
Timeline timeline(const Index& index, std::span<const std::string> lemmas, const SlicePlan& plan);

/// Region -> label of the slice with the highest per-million rate, ties to the
/// earlier slice. A region whose slices hold no tokens is a DataError.
std::map<std::string, std::string> peak_slice(const std::map<std::string, Timeline>& by_region);

struct BoundingBox {
    double lon_min = 0.0;
    double lat_min = 0.0;
    double lon_max = 0.0;
    double lat_max = 0.0;

    bool contains(double lon, double lat) const noexcept
    {
        return lon >= lon_min && lon <= lon_max && lat >= lat_min && lat <= lat_max;
    }
};

struct LonLat {
    double lon = 0.0;
    double lat = 0.0;
};

/// Row-major (south to north, then west to east) grid of occurrence mass.
struct GeoGrid {
    BoundingBox bbox;
    double cell = 1.0;
    double bandwidth = 0.0;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::vector<double> values;
    std::uint64_t occurrences = 0;  // located, inside the box
    std::uint64_t unlocated = 0;    // no coordinates and no regional fallback
    std::uint64_t outside = 0;      // located outside the box

    double at(std::size_t row, std::size_t col) const { return values[row * cols + col]; }
    LonLat center(std::size_t row, std::size_t col) const;
    double total() const;
};

struct GeoOptions {
    double cell = 0.5;      // degrees
    double bandwidth = 0.0; // degrees; 0 gives a plain histogram
    std::optional<BoundingBox> bbox; // default: cell-aligned hull of the occurrences
    std::map<std::string, LonLat> region_centroids; // fallback for unlocated charters
    CharterFilter filter;
};

/// Each occurrence adds a Gaussian kernel truncated at three bandwidths and
/// renormalized over the cells inside the box, so the grid total equals the
/// number of occurrences inside the box.
GeoGrid geo_density(const Index& index, std::span<const std::string> lemmas, const GeoOptions& options,
                    std::vector<std::string>* absent = nullptr);

/// Reads "region,lon,lat" rows (header optional).
std::map<std::string, LonLat> read_region_centroids(const std::filesystem::path& path);

} // namespace cema
