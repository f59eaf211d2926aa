#include <cema/kernels.hpp>

#include <algorithm>

namespace cema {

namespace {

std::vector<std::int32_t> column_map(const Index& index, std::span<const LemmaId> contexts)
{
    std::vector<std::int32_t> col(index.lemmas().size(), -1);
    for (std::size_t j = 0; j < contexts.size(); ++j)
        col[contexts[j]] = static_cast<std::int32_t>(j);
    return col;
}

} // namespace

std::vector<std::uint64_t> kernels::term_context_counts(const Index& index, std::span<const CharterIdx> charters,
                                                        std::span<const LemmaId> targets,
                                                        std::span<const LemmaId> contexts, int window)
{
    const auto ncols = contexts.size();
    const auto col = column_map(index, contexts);
    std::vector<std::uint8_t> allowed(index.charter_count(), 0);
    for (auto c : charters)
        allowed[c] = 1;
    const auto w = static_cast<std::size_t>(window);

    std::vector<std::uint64_t> cells(targets.size() * ncols, 0);
    const auto nt = static_cast<std::int64_t>(targets.size());
    // One row per target: rows are disjoint, so no reduction is needed.
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t r = 0; r < nt; ++r) {
        auto* row = cells.data() + static_cast<std::size_t>(r) * ncols;
        for (const auto& p : index.postings(targets[static_cast<std::size_t>(r)])) {
            if (!allowed[p.charter])
                continue;
            auto toks = index.lemmas_of(p.charter);
            const std::size_t i = p.position;
            const std::size_t lo = i >= w ? i - w : 0;
            const std::size_t hi = std::min(toks.size(), i + w + 1);
            for (std::size_t j = lo; j < hi; ++j) {
                if (j == i)
                    continue;
                if (auto c = col[toks[j]]; c >= 0)
                    ++row[c];
            }
        }
    }
    return cells;
}

std::vector<std::uint64_t> reference::term_context_counts(const Index& index, std::span<const CharterIdx> charters,
                                                          std::span<const LemmaId> targets,
                                                          std::span<const LemmaId> contexts, int window)
{
    std::vector<std::int32_t> row(index.lemmas().size(), -1);
    for (std::size_t r = 0; r < targets.size(); ++r)
        row[targets[r]] = static_cast<std::int32_t>(r);
    const auto col = column_map(index, contexts);
    std::vector<std::uint64_t> cells(targets.size() * contexts.size(), 0);
    for (auto c : charters) {
        auto toks = index.lemmas_of(c);
        const auto n = static_cast<std::ptrdiff_t>(toks.size());
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto r = row[toks[static_cast<std::size_t>(i)]];
            if (r < 0)
                continue;
            for (std::ptrdiff_t j = i - window; j <= i + window; ++j) {
                if (j < 0 || j >= n || j == i)
                    continue;
                const auto cc = col[toks[static_cast<std::size_t>(j)]];
                if (cc >= 0)
                    ++cells[static_cast<std::size_t>(r) * contexts.size() + static_cast<std::size_t>(cc)];
            }
        }
    }
    return cells;
}

} // namespace cema
