#include <cema/kernels.hpp>
#include <cema/random.hpp>
#include <cema/richness.hpp>

#include <algorithm>

namespace cema {

namespace {

std::vector<std::uint64_t> replicate_curve(std::span<const std::span<const LemmaId>> docs,
                                           std::span<const std::uint64_t> checkpoints,
                                           std::span<const std::size_t> order, LemmaId max_id)
{
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(max_id) + 1, 0);
    std::vector<std::uint64_t> out(checkpoints.size(), 0);
    std::uint64_t n = 0;
    std::uint64_t v = 0;
    std::size_t next = 0;
    while (next < checkpoints.size() && checkpoints[next] == 0)
        out[next++] = 0;
    for (auto d : order) {
        for (auto l : docs[d]) {
            if (!seen[l]) {
                seen[l] = 1;
                ++v;
            }
            ++n;
            while (next < checkpoints.size() && checkpoints[next] == n)
                out[next++] = v;
        }
        if (next == checkpoints.size())
            break;
    }
    return out;
}

LemmaId max_lemma(std::span<const std::span<const LemmaId>> docs)
{
    LemmaId m = 0;
    for (auto d : docs)
        for (auto l : d)
            m = std::max(m, l);
    return m;
}

} // namespace

std::vector<std::size_t> document_permutation(std::size_t docs, std::uint64_t seed, int r)
{
    std::vector<std::size_t> order(docs);
    for (std::size_t i = 0; i < docs; ++i)
        order[i] = i;
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    rng.shuffle(std::span<std::size_t>(order));
    return order;
}

std::vector<std::vector<std::uint64_t>> kernels::growth_replicates(std::span<const std::span<const LemmaId>> docs,
                                                                   std::span<const std::uint64_t> checkpoints,
                                                                   int replicates, std::uint64_t seed)
{
    const LemmaId max_id = max_lemma(docs);
    std::vector<std::vector<std::uint64_t>> out(static_cast<std::size_t>(std::max(replicates, 0)));
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < replicates; ++r) {
        auto order = document_permutation(docs.size(), seed, r);
        out[static_cast<std::size_t>(r)] = replicate_curve(docs, checkpoints, order, max_id);
    }
    return out;
}

std::vector<std::vector<std::uint64_t>> reference::growth_replicates(std::span<const std::span<const LemmaId>> docs,
                                                                     std::span<const std::uint64_t> checkpoints,
                                                                     int replicates, std::uint64_t seed)
{
    std::vector<std::vector<std::uint64_t>> out;
    for (int r = 0; r < replicates; ++r) {
        auto order = document_permutation(docs.size(), seed, r);
        std::vector<LemmaId> stream;
        for (auto d : order)
            stream.insert(stream.end(), docs[d].begin(), docs[d].end());
        auto curve = growth_curve(stream, checkpoints);
        out.push_back(curve.v_min);
    }
    return out;
}

} // namespace cema
