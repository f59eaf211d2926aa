#pragma once

#include <cema/index.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cema {

enum class GrowthMode { document_order, shuffled_mean };

/// V(N): distinct lemmas among the first N tokens, at each checkpoint.
struct GrowthCurve {
    GrowthMode mode = GrowthMode::document_order;
    std::vector<std::uint64_t> checkpoints;
    std::vector<double> v_mean;
    std::vector<std::uint64_t> v_min;
    std::vector<std::uint64_t> v_max;
    int replicates = 1;
    std::uint64_t seed = 0;
};

/// Checkpoints must be ascending (UsageError); one beyond the stream length
/// is a DataError.
GrowthCurve growth_curve(std::span<const LemmaId> stream, std::span<const std::uint64_t> checkpoints);

/// Averages `replicates` seeded shuffles of the document order; tokens stay
/// contiguous inside their document. Bit-for-bit reproducible for a given
/// (replicates, seed) whatever the thread count.
GrowthCurve mean_growth_curve(std::span<const std::span<const LemmaId>> docs,
                              std::span<const std::uint64_t> checkpoints, int replicates, std::uint64_t seed);

/// The document permutation used by replicate `r` of mean_growth_curve.
std::vector<std::size_t> document_permutation(std::size_t docs, std::uint64_t seed, int r);

struct NamedCorpus {
    std::string name;
    std::vector<std::span<const LemmaId>> docs;
};

struct RichnessRow {
    std::string corpus;
    std::uint64_t package = 0;
    std::optional<double> v_mean; // absent when the corpus is smaller than the package
    std::optional<std::uint64_t> v_min;
    std::optional<std::uint64_t> v_max;
    int replicates = 0;
    std::uint64_t seed = 0;
};

inline const std::vector<std::uint64_t> default_packages{500, 1000, 10000};

/// One row per corpus and package. With replicates == 0 the documents are
/// read in their given order.
std::vector<RichnessRow> richness_compare(std::span<const NamedCorpus> corpora,
                                          std::span<const std::uint64_t> packages, int replicates,
                                          std::uint64_t seed);

/// Groups charters by a metadata field (charters without it are skipped).
std::vector<NamedCorpus> corpora_by_field(const Index& index, const std::string& field,
                                          const CharterFilter& filter = {});

} // namespace cema
