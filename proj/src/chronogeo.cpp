#include <cema/chronogeo.hpp>
#include <cema/error.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cema {

std::string to_string(TimelineMode m)
{
    switch (m) {
    case TimelineMode::raw:
        return "raw";
    case TimelineMode::per_million:
        return "per_million";
    case TimelineMode::cumulative:
        return "cumulative";
    }
    return "raw";
}

TimelineMode parse_timeline_mode(std::string_view s)
{
    if (s == "raw")
        return TimelineMode::raw;
    if (s == "per_million" || s == "per-million")
        return TimelineMode::per_million;
    if (s == "cumulative")
        return TimelineMode::cumulative;
    throw UsageError("unknown timeline mode: " + std::string(s));
}

std::vector<double> Timeline::series(TimelineMode mode) const
{
    switch (mode) {
    case TimelineMode::per_million:
        return per_million;
    case TimelineMode::cumulative:
        return {cumulative.begin(), cumulative.end()};
    case TimelineMode::raw:
        break;
    }
    return {counts.begin(), counts.end()};
}

Timeline timeline(const Index& index, std::span<const std::string> lemmas, const SlicePlan& plan)
{
    if (plan.slices.empty())
        throw DataError("timeline needs at least one slice");
    Timeline t;
    const auto ids = index.resolve(lemmas, &t.absent);
    const auto n = plan.slices.size();
    t.counts.assign(n, 0);
    for (auto l : ids)
        for (const auto& p : index.postings(l))
            if (auto s = plan.slice_of[p.charter]; s >= 0)
                ++t.counts[static_cast<std::size_t>(s)];
    std::uint64_t run = 0;
    for (std::size_t s = 0; s < n; ++s) {
        t.labels.push_back(plan.slices[s].label);
        t.tokens.push_back(plan.slices[s].tokens);
        t.per_million.push_back(t.tokens[s] ? static_cast<double>(t.counts[s]) / static_cast<double>(t.tokens[s]) * 1e6
                                            : 0.0);
        run += t.counts[s];
        t.cumulative.push_back(run);
    }
    return t;
}

std::map<std::string, std::string> peak_slice(const std::map<std::string, Timeline>& by_region)
{
    std::map<std::string, std::string> out;
    for (const auto& [region, t] : by_region) {
        std::optional<std::size_t> best;
        for (std::size_t s = 0; s < t.labels.size(); ++s) {
            if (t.tokens[s] == 0)
                continue;
            if (!best || t.per_million[s] > t.per_million[*best])
                best = s;
        }
        if (!best)
            throw DataError("region '" + region + "' has no tokens in any slice");
        out.emplace(region, t.labels[*best]);
    }
    return out;
}

LonLat GeoGrid::center(std::size_t row, std::size_t col) const
{
    return {bbox.lon_min + (static_cast<double>(col) + 0.5) * cell,
            bbox.lat_min + (static_cast<double>(row) + 0.5) * cell};
}

double GeoGrid::total() const
{
    double s = 0.0;
    for (double v : values)
        s += v;
    return s;
}

namespace {

struct Occurrence {
    LonLat at;
    std::uint64_t weight;
};

std::optional<LonLat> locate(const Charter& c, const std::map<std::string, LonLat>& centroids)
{
    if (c.located())
        return LonLat{*c.lon, *c.lat};
    if (c.region)
        if (auto it = centroids.find(*c.region); it != centroids.end())
            return it->second;
    return std::nullopt;
}

std::size_t cell_of(double v, double lo, double cell, std::size_t n)
{
    const auto k = static_cast<std::int64_t>(std::floor((v - lo) / cell));
    return static_cast<std::size_t>(std::clamp<std::int64_t>(k, 0, static_cast<std::int64_t>(n) - 1));
}

} // namespace

GeoGrid geo_density(const Index& index, std::span<const std::string> lemmas, const GeoOptions& options,
                    std::vector<std::string>* absent)
{
    if (!(options.cell > 0.0) || !std::isfinite(options.cell))
        throw UsageError("cell size must be positive");
    if (!(options.bandwidth >= 0.0) || !std::isfinite(options.bandwidth))
        throw UsageError("bandwidth must be non-negative");

    GeoGrid g;
    g.cell = options.cell;
    g.bandwidth = options.bandwidth;

    const auto ids = index.resolve(lemmas, absent);
    std::vector<std::uint64_t> per_charter(index.charter_count(), 0);
    for (auto l : ids)
        for (const auto& p : index.postings(l))
            ++per_charter[p.charter];

    std::vector<Occurrence> occ;
    for (CharterIdx c = 0; c < index.charter_count(); ++c) {
        if (per_charter[c] == 0 || !options.filter.matches(index.charter(c)))
            continue;
        if (auto at = locate(index.charter(c), options.region_centroids))
            occ.push_back({*at, per_charter[c]});
        else
            g.unlocated += per_charter[c];
    }
    if (occ.empty())
        throw DataError("no located occurrence of the requested lemmas");

    if (options.bbox) {
        g.bbox = *options.bbox;
    } else {
        g.bbox = {occ[0].at.lon, occ[0].at.lat, occ[0].at.lon, occ[0].at.lat};
        for (const auto& o : occ) {
            g.bbox.lon_min = std::min(g.bbox.lon_min, o.at.lon);
            g.bbox.lon_max = std::max(g.bbox.lon_max, o.at.lon);
            g.bbox.lat_min = std::min(g.bbox.lat_min, o.at.lat);
            g.bbox.lat_max = std::max(g.bbox.lat_max, o.at.lat);
        }
        g.bbox.lon_min = std::floor(g.bbox.lon_min / g.cell) * g.cell;
        g.bbox.lat_min = std::floor(g.bbox.lat_min / g.cell) * g.cell;
        g.bbox.lon_max = std::max(std::ceil(g.bbox.lon_max / g.cell) * g.cell, g.bbox.lon_min + g.cell);
        g.bbox.lat_max = std::max(std::ceil(g.bbox.lat_max / g.cell) * g.cell, g.bbox.lat_min + g.cell);
    }
    const auto& b = g.bbox;
    if (!(b.lon_max > b.lon_min) || !(b.lat_max > b.lat_min))
        throw UsageError("bounding box is empty");
    g.cols = static_cast<std::size_t>(std::ceil((b.lon_max - b.lon_min) / g.cell - 1e-9));
    g.rows = static_cast<std::size_t>(std::ceil((b.lat_max - b.lat_min) / g.cell - 1e-9));
    g.cols = std::max<std::size_t>(g.cols, 1);
    g.rows = std::max<std::size_t>(g.rows, 1);
    g.values.assign(g.rows * g.cols, 0.0);

    const double h = g.bandwidth;
    const double reach = 3.0 * h;
    std::vector<std::pair<std::size_t, double>> kernel;
    for (const auto& o : occ) {
        if (!b.contains(o.at.lon, o.at.lat)) {
            g.outside += o.weight;
            continue;
        }
        g.occurrences += o.weight;
        const auto w = static_cast<double>(o.weight);
        const std::size_t hr = cell_of(o.at.lat, b.lat_min, g.cell, g.rows);
        const std::size_t hc = cell_of(o.at.lon, b.lon_min, g.cell, g.cols);
        if (h == 0.0) {
            g.values[hr * g.cols + hc] += w;
            continue;
        }
        kernel.clear();
        double mass = 0.0;
        const std::size_t r0 = cell_of(o.at.lat - reach, b.lat_min, g.cell, g.rows);
        const std::size_t r1 = cell_of(o.at.lat + reach, b.lat_min, g.cell, g.rows);
        const std::size_t c0 = cell_of(o.at.lon - reach, b.lon_min, g.cell, g.cols);
        const std::size_t c1 = cell_of(o.at.lon + reach, b.lon_min, g.cell, g.cols);
        for (std::size_t r = r0; r <= r1; ++r)
            for (std::size_t c = c0; c <= c1; ++c) {
                const auto ctr = g.center(r, c);
                const double dx = ctr.lon - o.at.lon;
                const double dy = ctr.lat - o.at.lat;
                const double d2 = dx * dx + dy * dy;
                if (d2 > reach * reach)
                    continue;
                const double k = std::exp(-0.5 * d2 / (h * h));
                kernel.emplace_back(r * g.cols + c, k);
                mass += k;
            }
        if (mass <= 0.0) {
            // Bandwidth far below the cell size: no cell center in reach.
            g.values[hr * g.cols + hc] += w;
            continue;
        }
        for (const auto& [cell, k] : kernel)
            g.values[cell] += w * k / mass;
    }
    return g;
}

std::map<std::string, LonLat> read_region_centroids(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot read centroid table " + path.string());
    std::map<std::string, LonLat> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cols.push_back(cell);
        if (cols.size() != 3)
            throw DataError("centroid table line " + std::to_string(n) + ": expected region,lon,lat");
        try {
            std::size_t p1 = 0;
            std::size_t p2 = 0;
            const double lon = std::stod(cols[1], &p1);
            const double lat = std::stod(cols[2], &p2);
            if (p1 != cols[1].size() || p2 != cols[2].size())
                throw std::invalid_argument("trailing characters");
            out[cols[0]] = {lon, lat};
        } catch (const std::exception&) {
            if (n == 1)
                continue; // header
            throw DataError("centroid table line " + std::to_string(n) + ": bad coordinate");
        }
    }
    return out;
}

} // namespace cema
