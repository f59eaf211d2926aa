#pragma once

// Brute-force reference computations. They share no code with the library
// and favour obviousness over speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace cema::oracle {

using Doc = std::vector<std::string>;

struct PairEvents {
    std::map<std::pair<std::string, std::string>, std::uint64_t> pairs; // key: (min, max)
    std::map<std::string, std::uint64_t> marginals;
    std::uint64_t events = 0;
};

/// Enumerates every position pair i < j with j - i <= w in each document.
inline PairEvents enumerate_pairs(const std::vector<Doc>& docs, int w)
{
    PairEvents out;
    for (const auto& d : docs)
        for (std::size_t i = 0; i < d.size(); ++i)
            for (std::size_t j = i + 1; j < d.size(); ++j) {
                if (j - i > static_cast<std::size_t>(w))
                    break;
                const auto& a = std::min(d[i], d[j]);
                const auto& b = std::max(d[i], d[j]);
                ++out.pairs[{a, b}];
                ++out.marginals[d[i]];
                ++out.marginals[d[j]];
                ++out.events;
            }
    return out;
}

/// Cell (t, c): tokens equal to c at distance 1..w from an occurrence of t.
inline std::map<std::pair<std::string, std::string>, std::uint64_t> window_scan(const std::vector<Doc>& docs, int w)
{
    std::map<std::pair<std::string, std::string>, std::uint64_t> out;
    for (const auto& d : docs)
        for (std::size_t i = 0; i < d.size(); ++i)
            for (std::size_t j = 0; j < d.size(); ++j) {
                const auto dist = i > j ? i - j : j - i;
                if (dist >= 1 && dist <= static_cast<std::size_t>(w))
                    ++out[{d[i], d[j]}];
            }
    return out;
}

/// Pearson chi-square divided by n.
inline double chi2_over_n(const std::vector<std::vector<double>>& t)
{
    double n = 0;
    std::vector<double> rs(t.size(), 0.0);
    std::vector<double> cs(t.empty() ? 0 : t[0].size(), 0.0);
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = 0; j < t[i].size(); ++j) {
            rs[i] += t[i][j];
            cs[j] += t[i][j];
            n += t[i][j];
        }
    double chi2 = 0;
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = 0; j < t[i].size(); ++j) {
            if (rs[i] == 0 || cs[j] == 0)
                continue;
            const double e = rs[i] * cs[j] / n;
            chi2 += (t[i][j] - e) * (t[i][j] - e) / e;
        }
    return chi2 / n;
}

/// V(N) by inserting tokens into a set one at a time.
template <class T>
std::vector<std::uint64_t> set_scan_growth(const std::vector<T>& stream, const std::vector<std::uint64_t>& checkpoints)
{
    std::vector<std::uint64_t> out;
    std::set<T> seen;
    std::size_t pos = 0;
    for (auto n : checkpoints) {
        while (pos < n)
            seen.insert(stream[pos++]);
        out.push_back(seen.size());
    }
    return out;
}

/// Exact E[V(N)] over all orderings of the documents.
template <class T>
double expected_growth(std::vector<std::vector<T>> docs, std::uint64_t n)
{
    std::vector<std::size_t> order(docs.size());
    std::iota(order.begin(), order.end(), 0);
    double total = 0;
    std::uint64_t perms = 0;
    do {
        std::vector<T> stream;
        for (auto i : order)
            stream.insert(stream.end(), docs[i].begin(), docs[i].end());
        total += static_cast<double>(set_scan_growth(stream, {n})[0]);
        ++perms;
    } while (std::next_permutation(order.begin(), order.end()));
    return total / static_cast<double>(perms);
}

/// Plain 2-D histogram: cell (row, col) of a point, the last cell closed.
inline std::vector<double> histogram(const std::vector<std::pair<double, double>>& lonlat, double lon0, double lat0,
                                     double cell, std::size_t cols, std::size_t rows)
{
    std::vector<double> out(rows * cols, 0.0);
    for (const auto& [lon, lat] : lonlat) {
        auto c = static_cast<std::size_t>(std::floor((lon - lon0) / cell));
        auto r = static_cast<std::size_t>(std::floor((lat - lat0) / cell));
        c = std::min(c, cols - 1);
        r = std::min(r, rows - 1);
        out[r * cols + c] += 1.0;
    }
    return out;
}

/// Mean silhouette over points (rows), Euclidean; singletons score 0.
inline double silhouette(const std::vector<std::vector<double>>& pts, const std::vector<int>& labels)
{
    const auto n = pts.size();
    auto dist = [&](std::size_t a, std::size_t b) {
        double s = 0;
        for (std::size_t k = 0; k < pts[a].size(); ++k)
            s += (pts[a][k] - pts[b][k]) * (pts[a][k] - pts[b][k]);
        return std::sqrt(s);
    };
    std::set<int> groups(labels.begin(), labels.end());
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::map<int, std::pair<double, std::size_t>> acc;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) {
                auto& a = acc[labels[j]];
                a.first += dist(i, j);
                ++a.second;
            }
        const auto own = acc[labels[i]];
        if (own.second == 0)
            continue;
        const double a = own.first / static_cast<double>(own.second);
        double b = INFINITY;
        for (int g : groups)
            if (g != labels[i] && acc[g].second > 0)
                b = std::min(b, acc[g].first / static_cast<double>(acc[g].second));
        total += (b - a) / std::max(a, b);
    }
    return total / static_cast<double>(n);
}

/// Adjusted-free partition agreement: 1 when the two labelings induce the
/// same partition.
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b)
{
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if ((a[i] == a[j]) != (b[i] == b[j]))
                return false;
    return true;
}

/// Per-token lemma frequencies by a linear scan.
inline std::map<std::string, std::uint64_t> frequencies(const std::vector<Doc>& docs)
{
    std::map<std::string, std::uint64_t> out;
    for (const auto& d : docs)
        for (const auto& t : d)
            ++out[t];
    return out;
}

} // namespace cema::oracle
