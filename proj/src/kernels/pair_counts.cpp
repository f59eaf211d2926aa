#include <cema/kernels.hpp>

#include <omp.h>

#include <algorithm>
#include <map>
#include <unordered_map>

namespace cema {

namespace {

using Key = std::uint64_t;

constexpr Key pair_key(LemmaId a, LemmaId b) noexcept
{
    return a <= b ? (static_cast<Key>(a) << 32) | b : (static_cast<Key>(b) << 32) | a;
}

std::uint64_t events_in(std::uint64_t n, std::uint64_t w)
{
    std::uint64_t e = 0;
    for (std::uint64_t d = 1; d <= w && d < n; ++d)
        e += n - d;
    return e;
}

} // namespace

PairCounts kernels::count_pairs(const Index& index, std::span<const CharterIdx> charters, int window,
                                std::span<const std::uint8_t> focus)
{
    const auto w = static_cast<std::size_t>(window);
    const auto vocab = index.lemmas().size();
    const bool focused = !focus.empty();
    const auto n = static_cast<std::int64_t>(charters.size());

    int threads = 1;
#pragma omp parallel
    {
#pragma omp single
        threads = omp_get_num_threads();
    }

    std::vector<std::unordered_map<Key, std::uint64_t>> local(static_cast<std::size_t>(threads));
    std::vector<std::vector<std::uint64_t>> marg(static_cast<std::size_t>(threads));
    std::vector<std::uint64_t> events(static_cast<std::size_t>(threads), 0);

#pragma omp parallel num_threads(threads)
    {
        const auto t = static_cast<std::size_t>(omp_get_thread_num());
        auto& counts = local[t];
        auto& m = marg[t];
        m.assign(vocab, 0);
#pragma omp for schedule(dynamic, 64)
        for (std::int64_t ci = 0; ci < n; ++ci) {
            auto toks = index.lemmas_of(charters[static_cast<std::size_t>(ci)]);
            const auto len = toks.size();
            events[t] += events_in(len, w);
            for (std::size_t i = 0; i < len; ++i) {
                const auto a = toks[i];
                m[a] += std::min(i, w) + std::min(len - 1 - i, w);
                const auto end = std::min(len, i + w + 1);
                for (std::size_t j = i + 1; j < end; ++j) {
                    const auto b = toks[j];
                    if (focused && !focus[a] && !focus[b])
                        continue;
                    ++counts[pair_key(a, b)];
                }
            }
        }
    }

    PairCounts out;
    out.marginals.assign(vocab, 0);
    for (std::size_t t = 0; t < local.size(); ++t) {
        out.events += events[t];
        for (std::size_t l = 0; l < vocab; ++l)
            out.marginals[l] += marg[t][l];
    }

    std::vector<std::pair<Key, std::uint64_t>> flat;
    std::size_t total = 0;
    for (const auto& m : local)
        total += m.size();
    flat.reserve(total);
    for (auto& m : local) {
        flat.insert(flat.end(), m.begin(), m.end());
        std::unordered_map<Key, std::uint64_t>{}.swap(m);
    }
    std::sort(flat.begin(), flat.end());
    for (std::size_t i = 0; i < flat.size();) {
        auto key = flat[i].first;
        std::uint64_t c = 0;
        for (; i < flat.size() && flat[i].first == key; ++i)
            c += flat[i].second;
        out.pairs.push_back({static_cast<LemmaId>(key >> 32), static_cast<LemmaId>(key & 0xFFFFFFFFu), c});
    }
    return out;
}

PairCounts reference::count_pairs(const Index& index, std::span<const CharterIdx> charters, int window,
                                  std::span<const std::uint8_t> focus)
{
    std::map<std::pair<LemmaId, LemmaId>, std::uint64_t> counts;
    PairCounts out;
    out.marginals.assign(index.lemmas().size(), 0);
    for (auto c : charters) {
        auto toks = index.lemmas_of(c);
        for (std::size_t i = 0; i < toks.size(); ++i) {
            for (std::size_t j = i + 1; j < toks.size() && j - i <= static_cast<std::size_t>(window); ++j) {
                const auto a = std::min(toks[i], toks[j]);
                const auto b = std::max(toks[i], toks[j]);
                ++out.events;
                ++out.marginals[toks[i]];
                ++out.marginals[toks[j]];
                if (!focus.empty() && !focus[a] && !focus[b])
                    continue;
                ++counts[{a, b}];
            }
        }
    }
    for (const auto& [k, v] : counts)
        out.pairs.push_back({k.first, k.second, v});
    return out;
}

} // namespace cema
