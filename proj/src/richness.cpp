#include <cema/error.hpp>
#include <cema/kernels.hpp>
#include <cema/richness.hpp>

#include <algorithm>
#include <map>
#include <unordered_set>

namespace cema {

namespace {

void check_checkpoints(std::span<const std::uint64_t> checkpoints, std::uint64_t length)
{
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
        throw UsageError("growth checkpoints must be ascending");
    if (!checkpoints.empty() && checkpoints.back() > length)
        throw DataError("checkpoint " + std::to_string(checkpoints.back()) + " exceeds stream length " +
                        std::to_string(length));
}

} // namespace

GrowthCurve growth_curve(std::span<const LemmaId> stream, std::span<const std::uint64_t> checkpoints)
{
    check_checkpoints(checkpoints, stream.size());
    GrowthCurve g;
    g.mode = GrowthMode::document_order;
    g.checkpoints.assign(checkpoints.begin(), checkpoints.end());

    std::unordered_set<LemmaId> seen;
    std::size_t next = 0;
    auto emit = [&](std::uint64_t n) {
        while (next < checkpoints.size() && checkpoints[next] == n) {
            g.v_min.push_back(seen.size());
            ++next;
        }
    };
    emit(0);
    for (std::size_t i = 0; i < stream.size() && next < checkpoints.size(); ++i) {
        seen.insert(stream[i]);
        emit(i + 1);
    }
    g.v_max = g.v_min;
    g.v_mean.assign(g.v_min.begin(), g.v_min.end());
    return g;
}

GrowthCurve mean_growth_curve(std::span<const std::span<const LemmaId>> docs,
                              std::span<const std::uint64_t> checkpoints, int replicates, std::uint64_t seed)
{
    if (replicates < 1)
        throw UsageError("replicate count must be at least 1");
    std::uint64_t length = 0;
    for (auto d : docs)
        length += d.size();
    check_checkpoints(checkpoints, length);

    const auto runs = kernels::growth_replicates(docs, checkpoints, replicates, seed);

    GrowthCurve g;
    g.mode = GrowthMode::shuffled_mean;
    g.checkpoints.assign(checkpoints.begin(), checkpoints.end());
    g.replicates = replicates;
    g.seed = seed;
    const auto k = checkpoints.size();
    g.v_mean.assign(k, 0.0);
    g.v_min.assign(k, ~std::uint64_t{0});
    g.v_max.assign(k, 0);
    for (const auto& run : runs) {
        for (std::size_t i = 0; i < k; ++i) {
            g.v_mean[i] += static_cast<double>(run[i]);
            g.v_min[i] = std::min(g.v_min[i], run[i]);
            g.v_max[i] = std::max(g.v_max[i], run[i]);
        }
    }
    for (auto& v : g.v_mean)
        v /= replicates;
    return g;
}

std::vector<RichnessRow> richness_compare(std::span<const NamedCorpus> corpora,
                                          std::span<const std::uint64_t> packages, int replicates,
                                          std::uint64_t seed)
{
    std::vector<std::uint64_t> sorted(packages.begin(), packages.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<RichnessRow> rows;
    for (const auto& corpus : corpora) {
        std::uint64_t length = 0;
        for (auto d : corpus.docs)
            length += d.size();
        std::vector<std::uint64_t> reachable;
        for (auto p : sorted)
            if (p <= length)
                reachable.push_back(p);

        GrowthCurve curve;
        if (replicates == 0) {
            std::vector<LemmaId> stream;
            stream.reserve(length);
            for (auto d : corpus.docs)
                stream.insert(stream.end(), d.begin(), d.end());
            curve = growth_curve(stream, reachable);
        } else {
            curve = mean_growth_curve(corpus.docs, reachable, replicates, seed);
        }

        for (auto p : packages) {
            RichnessRow row;
            row.corpus = corpus.name;
            row.package = p;
            row.replicates = replicates;
            row.seed = seed;
            auto it = std::find(reachable.begin(), reachable.end(), p);
            if (it != reachable.end()) {
                const auto i = static_cast<std::size_t>(it - reachable.begin());
                row.v_mean = curve.v_mean[i];
                row.v_min = curve.v_min[i];
                row.v_max = curve.v_max[i];
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<NamedCorpus> corpora_by_field(const Index& index, const std::string& field, const CharterFilter& filter)
{
    std::map<std::string, NamedCorpus> groups;
    for (auto c : select_charters(index, filter)) {
        auto v = charter_field(index.charter(c), field);
        if (!v)
            continue;
        auto& g = groups[std::string(*v)];
        g.name = *v;
        g.docs.push_back(index.lemmas_of(c));
    }
    std::vector<NamedCorpus> out;
    for (auto& [_, g] : groups)
        out.push_back(std::move(g));
    return out;
}

} // namespace cema
