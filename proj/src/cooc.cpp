#include <cema/cooc.hpp>
#include <cema/error.hpp>

#include <algorithm>
#include <cmath>

namespace cema {

PairTable::PairTable(int window, PairCounts counts, std::optional<std::vector<LemmaId>> focus,
                     std::vector<std::uint64_t> token_freq)
    : window_(window), counts_(std::move(counts)), token_freq_(std::move(token_freq))
{
    const auto vocab = counts_.marginals.size();
    if (focus) {
        focus_mask_.assign(vocab, 0);
        for (auto l : *focus)
            if (l < vocab)
                focus_mask_[l] = 1;
    }
    first_index_.assign(vocab + 1, 0);
    for (const auto& p : counts_.pairs)
        ++first_index_[p.first + 1];
    for (std::size_t i = 0; i < vocab; ++i)
        first_index_[i + 1] += first_index_[i];
}

std::uint64_t PairTable::count(LemmaId x, LemmaId y) const
{
    const auto a = std::min(x, y);
    const auto b = std::max(x, y);
    if (b >= counts_.marginals.size())
        return 0;
    auto begin = counts_.pairs.begin() + static_cast<std::ptrdiff_t>(first_index_[a]);
    auto end = counts_.pairs.begin() + static_cast<std::ptrdiff_t>(first_index_[a + 1]);
    auto it = std::lower_bound(begin, end, b, [](const PairCount& p, LemmaId v) { return p.second < v; });
    return it != end && it->second == b ? it->count : 0;
}

bool PairTable::covers(LemmaId x, LemmaId y) const
{
    if (focus_mask_.empty())
        return true;
    auto in = [&](LemmaId l) { return l < focus_mask_.size() && focus_mask_[l]; };
    return in(x) || in(y);
}

std::vector<LemmaId> PairTable::partners(LemmaId x) const
{
    std::vector<LemmaId> out;
    if (x >= counts_.marginals.size())
        return out;
    for (const auto& p : counts_.pairs) {
        if (p.first == x && p.second != x)
            out.push_back(p.second);
        else if (p.second == x && p.first != x)
            out.push_back(p.first);
    }
    std::sort(out.begin(), out.end());
    return out;
}

PairTable pair_table(const Index& index, const PairTableOptions& options)
{
    if (options.window < 1)
        throw UsageError("window must be at least 1");

    std::vector<CharterIdx> charters;
    if (options.charters) {
        for (auto c : *options.charters)
            if (options.filter.matches(index.charter(c)))
                charters.push_back(c);
    } else {
        charters = select_charters(index, options.filter);
    }
    if (charters.empty())
        throw DataError("no charter left for co-occurrence counting");

    std::vector<std::uint8_t> mask;
    if (options.focus) {
        mask.assign(index.lemmas().size(), 0);
        for (auto l : *options.focus)
            mask.at(l) = 1;
    }
    std::vector<std::uint64_t> freq(index.lemmas().size(), 0);
    for (auto c : charters)
        for (auto l : index.lemmas_of(c))
            ++freq[l];

    auto counts = kernels::count_pairs(index, charters, options.window, mask);
    return PairTable(options.window, std::move(counts), options.focus, std::move(freq));
}

std::string to_string(Measure m)
{
    return m == Measure::dice ? "dice" : "llr";
}

Measure parse_measure(std::string_view s)
{
    if (s == "dice")
        return Measure::dice;
    if (s == "llr")
        return Measure::llr;
    throw UsageError("unknown association measure: " + std::string(s));
}

double log_likelihood_ratio(double a, double b, double c, double d)
{
    a = std::max(a, 0.0);
    b = std::max(b, 0.0);
    c = std::max(c, 0.0);
    d = std::max(d, 0.0);
    const double n = a + b + c + d;
    if (n <= 0.0)
        return 0.0;
    auto term = [n](double o, double row, double col) {
        if (o <= 0.0)
            return 0.0;
        return o * std::log(o * n / (row * col));
    };
    const double g2 = 2.0 * (term(a, a + b, a + c) + term(b, a + b, b + d) + term(c, c + d, a + c) +
                             term(d, c + d, b + d));
    return std::max(g2, 0.0);
}

AssociationScore associate(const PairTable& table, LemmaId x, LemmaId y, Measure measure)
{
    if (!table.covers(x, y))
        throw UsageError("pair table was not built to cover this pair");
    AssociationScore s;
    s.pivot = x;
    s.target = y;
    s.measure = measure;
    s.f_xy = table.count(x, y);
    s.f_x = table.marginal(x);
    s.f_y = table.marginal(y);
    if (s.f_x + s.f_y == 0)
        throw DataError("association undefined: f(x) + f(y) = 0");
    const double fxy = static_cast<double>(s.f_xy);
    const double fx = static_cast<double>(s.f_x);
    const double fy = static_cast<double>(s.f_y);
    if (measure == Measure::dice) {
        s.value = 2.0 * fxy / (fx + fy);
    } else {
        const double e = static_cast<double>(table.events());
        s.value = log_likelihood_ratio(fxy, fx - fxy, fy - fxy, e - fx - fy + fxy);
    }
    return s;
}

std::vector<AssociationScore> top_cooccurrents(const PairTable& table, const Index& index, LemmaId pivot,
                                               const RankingOptions& options)
{
    if (pivot >= index.lemmas().size() || table.token_frequency(pivot) == 0)
        throw DataError("pivot absent from the counted charters");
    if (options.k == 0)
        return {};

    std::vector<AssociationScore> scores;
    for (auto y : table.partners(pivot)) {
        if (std::find(options.stoplist.begin(), options.stoplist.end(), y) != options.stoplist.end())
            continue;
        if (table.marginal(y) < options.min_freq)
            continue;
        scores.push_back(associate(table, pivot, y, options.measure));
    }
    const auto& names = index.lemmas();
    std::sort(scores.begin(), scores.end(), [&](const AssociationScore& a, const AssociationScore& b) {
        if (a.value != b.value)
            return a.value > b.value;
        if (a.f_xy != b.f_xy)
            return a.f_xy > b.f_xy;
        return names[a.target] < names[b.target];
    });
    if (scores.size() > options.k)
        scores.resize(options.k);
    return scores;
}

AssociationMatrix second_order(const PairTable& pivot_table, const PairTable& table, const Index& index,
                               LemmaId pivot, const RankingOptions& ranking)
{
    auto top = top_cooccurrents(pivot_table, index, pivot, ranking);
    if (top.size() < 2)
        throw DataError("second-order analysis needs at least two co-occurrents");
    AssociationMatrix m;
    for (const auto& s : top)
        m.terms.push_back(s.target);
    const auto k = m.terms.size();
    m.values.assign(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) {
            const auto& a = m.terms[i];
            const auto& b = m.terms[j];
            const double v = table.marginal(a) + table.marginal(b) == 0
                                 ? 0.0
                                 : associate(table, a, b, ranking.measure).value;
            m.values[i * k + j] = v;
            m.values[j * k + i] = v;
        }
    return m;
}

AssociationMatrix second_order(const Index& index, LemmaId pivot, const RankingOptions& ranking,
                               const PairTableOptions& options)
{
    auto first = options;
    first.focus = std::vector<LemmaId>{pivot};
    const auto pivot_table = pair_table(index, first);
    auto top = top_cooccurrents(pivot_table, index, pivot, ranking);
    auto second = options;
    second.focus = std::vector<LemmaId>{};
    for (const auto& s : top)
        second.focus->push_back(s.target);
    const auto table = pair_table(index, second);
    return second_order(pivot_table, table, index, pivot, ranking);
}

std::vector<std::optional<AssociationScore>> association_timeline(const Index& index, LemmaId pivot,
                                                                  LemmaId target, const SlicePlan& plan,
                                                                  Measure measure, int window)
{
    std::vector<std::optional<AssociationScore>> out;
    for (const auto& slice : plan.slices) {
        if (slice.charters.empty()) {
            out.emplace_back();
            continue;
        }
        PairTableOptions opt;
        opt.window = window;
        opt.charters = slice.charters;
        opt.focus = std::vector<LemmaId>{pivot};
        const auto table = pair_table(index, opt);
        if (table.token_frequency(pivot) == 0 || table.token_frequency(target) == 0 ||
            table.marginal(pivot) + table.marginal(target) == 0) {
            out.emplace_back();
            continue;
        }
        out.emplace_back(associate(table, pivot, target, measure));
    }
    return out;
}

} // namespace cema
