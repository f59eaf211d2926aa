// Parallel kernels against their serial reference twins on a synthetic corpus.

#include <cema/dsm.hpp>
#include <cema/index.hpp>
#include <cema/kernels.hpp>
#include <cema/synth.hpp>

#include <benchmark/benchmark.h>

#include <numeric>

namespace {

struct Fixture {
    cema::SynthCorpus synth;
    cema::Lexicon lexicon;
    cema::Index index;
    std::vector<cema::CharterIdx> all;
    std::vector<cema::LemmaId> targets;
    std::vector<cema::LemmaId> contexts;

    Fixture()
        : synth(cema::generate_synthetic({.charters = 5000})),
          lexicon(cema::Lexicon::from_rows(synth.lexicon)),
          index(cema::build_index(synth.corpus, lexicon)),
          all(index.charter_count())
    {
        std::iota(all.begin(), all.end(), 0u);
        targets = cema::select_targets(index, 20);
        contexts = cema::select_contexts(index, 500);
    }
};

const Fixture& fixture()
{
    static const Fixture f;
    return f;
}

template <auto Fn>
void tokenize(benchmark::State& state)
{
    const auto& f = fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(Fn(f.synth.corpus.charters, f.lexicon));
}

template <auto Fn>
void pairs(benchmark::State& state)
{
    const auto& f = fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(Fn(f.index, f.all, 10, {}));
}

template <auto Fn>
void term_context(benchmark::State& state)
{
    const auto& f = fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(Fn(f.index, f.all, f.targets, f.contexts, 5));
}

template <auto Fn>
void growth(benchmark::State& state)
{
    const auto& f = fixture();
    std::vector<std::span<const cema::LemmaId>> docs;
    for (auto c : f.all)
        docs.push_back(f.index.lemmas_of(c));
    const std::vector<std::uint64_t> checkpoints{500, 1000, 10000, 100000};
    for (auto _ : state)
        benchmark::DoNotOptimize(Fn(docs, checkpoints, 16, 7));
}

} // namespace

BENCHMARK(tokenize<cema::kernels::tokenize_corpus>)->Name("tokenize/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(tokenize<cema::reference::tokenize_corpus>)->Name("tokenize/reference")->Unit(benchmark::kMillisecond);
BENCHMARK(pairs<cema::kernels::count_pairs>)->Name("count_pairs/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(pairs<cema::reference::count_pairs>)->Name("count_pairs/reference")->Unit(benchmark::kMillisecond);
BENCHMARK(term_context<cema::kernels::term_context_counts>)
    ->Name("term_context/parallel")
    ->Unit(benchmark::kMillisecond);
BENCHMARK(term_context<cema::reference::term_context_counts>)
    ->Name("term_context/reference")
    ->Unit(benchmark::kMillisecond);
BENCHMARK(growth<cema::kernels::growth_replicates>)->Name("growth/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(growth<cema::reference::growth_replicates>)->Name("growth/reference")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
