#pragma once

#include <cema/index.hpp>
#include <cema/kernels.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cema {

inline constexpr int default_window = 10;

struct PairTableOptions {
    int window = default_window;
    CharterFilter filter;
    /// Restricts counting to these charters (still subject to `filter`).
    std::optional<std::vector<CharterIdx>> charters;
    /// When set, only pairs touching one of these lemmas are stored.
    std::optional<std::vector<LemmaId>> focus;
};

/// Unordered window co-occurrence events inside charters.
///
/// An event is a token-position pair {i, j} with 0 < j - i <= window in the
/// same charter. f(x) counts every event endpoint that is x, so a {x, x}
/// event adds 2 to f(x) and the marginals sum to 2E.
class PairTable {
public:
    PairTable() = default;
    PairTable(int window, PairCounts counts, std::optional<std::vector<LemmaId>> focus,
              std::vector<std::uint64_t> token_freq);

    int window() const noexcept { return window_; }
    std::uint64_t events() const noexcept { return counts_.events; }
    std::uint64_t count(LemmaId x, LemmaId y) const;
    std::uint64_t marginal(LemmaId x) const { return x < counts_.marginals.size() ? counts_.marginals[x] : 0; }
    /// Occurrences of x among the counted charters.
    std::uint64_t token_frequency(LemmaId x) const { return x < token_freq_.size() ? token_freq_[x] : 0; }
    std::span<const PairCount> pairs() const noexcept { return counts_.pairs; }
    const PairCounts& raw() const noexcept { return counts_; }

    /// True when f(x, y) is known exactly: no focus, or x or y in focus.
    bool covers(LemmaId x, LemmaId y) const;

    /// Lemmas y != x with f(x, y) > 0, ascending.
    std::vector<LemmaId> partners(LemmaId x) const;

private:
    int window_ = default_window;
    PairCounts counts_;
    std::vector<std::uint8_t> focus_mask_; // empty: every pair stored
    std::vector<std::uint64_t> token_freq_;
    std::vector<std::uint64_t> first_index_; // pairs range per first lemma
};

/// Throws UsageError for window < 1 and DataError when no charter remains.
PairTable pair_table(const Index& index, const PairTableOptions& options);

enum class Measure { dice, llr };

std::string to_string(Measure m);
Measure parse_measure(std::string_view s);

struct AssociationScore {
    LemmaId pivot = 0;
    LemmaId target = 0;
    Measure measure = Measure::dice;
    double value = 0.0;
    std::uint64_t f_xy = 0;
    std::uint64_t f_x = 0;
    std::uint64_t f_y = 0;
};

/// dice = 2 f(x,y) / (f(x) + f(y)); llr = Dunning G2 over the 2x2 event
/// table. Throws DataError when f(x) + f(y) = 0 and UsageError when the
/// table does not cover the pair.
AssociationScore associate(const PairTable& table, LemmaId x, LemmaId y, Measure measure);

/// G2 statistic of a 2x2 table [[a, b], [c, d]]; negative cells clamp to 0.
double log_likelihood_ratio(double a, double b, double c, double d);

struct RankingOptions {
    std::size_t k = 50;
    Measure measure = Measure::dice;
    std::uint64_t min_freq = 1;          // on the event marginal f(target)
    std::vector<LemmaId> stoplist;       // targets never ranked
};

/// Co-occurrents of `pivot` by descending score, then descending f(x,y),
/// then target string. The pivot itself is never ranked.
std::vector<AssociationScore> top_cooccurrents(const PairTable& table, const Index& index, LemmaId pivot,
                                               const RankingOptions& options);

struct AssociationMatrix {
    std::vector<LemmaId> terms;
    std::vector<double> values; // row-major terms x terms, symmetric

    double operator()(std::size_t i, std::size_t j) const { return values[i * terms.size() + j]; }
};

/// Association among the pivot's top-k co-occurrents. `ranking` comes from
/// the pivot table; `table` must cover every pair among the co-occurrents.
AssociationMatrix second_order(const PairTable& pivot_table, const PairTable& table, const Index& index,
                               LemmaId pivot, const RankingOptions& ranking);

/// Builds both tables from the index (focus on the pivot, then on its
/// co-occurrents).
AssociationMatrix second_order(const Index& index, LemmaId pivot, const RankingOptions& ranking,
                               const PairTableOptions& options = {});

/// One score per slice; nullopt where pivot or target does not occur.
std::vector<std::optional<AssociationScore>> association_timeline(const Index& index, LemmaId pivot,
                                                                  LemmaId target, const SlicePlan& plan,
                                                                  Measure measure, int window = default_window);

} // namespace cema
