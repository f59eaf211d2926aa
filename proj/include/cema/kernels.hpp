#pragma once

// Data-parallel kernels. Every kernel in `cema::kernels` has a serial twin in
// `cema::reference` with the same signature; tests require identical output
// for any thread count, and bench/ compares their speed.

#include <cema/index.hpp>
#include <cema/lemma.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace cema {

struct TokenizedCorpus {
    Vocabulary lemmas;
    Vocabulary forms;
    std::vector<std::uint8_t> form_known;
    TokenStore tokens;
};

/// Unordered lemma pair {first <= second} with its event count.
struct PairCount {
    LemmaId first;
    LemmaId second;
    std::uint64_t count;

    friend bool operator==(const PairCount&, const PairCount&) = default;
};

struct PairCounts {
    std::vector<PairCount> pairs;         // sorted by (first, second)
    std::vector<std::uint64_t> marginals; // per lemma, over all events
    std::uint64_t events = 0;

    friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

namespace kernels {

TokenizedCorpus tokenize_corpus(std::span<const Charter> charters, const Lexicon& lexicon);

/// Window events {i, j}, 0 < j - i <= window, inside each listed charter.
/// With a non-empty `focus` mask (per lemma), only pairs touching a focus
/// lemma are stored; marginals and the event total always cover all events.
PairCounts count_pairs(const Index& index, std::span<const CharterIdx> charters, int window,
                       std::span<const std::uint8_t> focus = {});

/// Row-major targets x contexts: for every occurrence of a target, each
/// context token within +-window in the same charter counts once.
std::vector<std::uint64_t> term_context_counts(const Index& index, std::span<const CharterIdx> charters,
                                               std::span<const LemmaId> targets,
                                               std::span<const LemmaId> contexts, int window);

/// Distinct-type counts at each checkpoint for `replicates` shuffles of the
/// document order; row r uses the shuffle seeded by derive_seed(seed, r).
std::vector<std::vector<std::uint64_t>> growth_replicates(std::span<const std::span<const LemmaId>> docs,
                                                          std::span<const std::uint64_t> checkpoints,
                                                          int replicates, std::uint64_t seed);

} // namespace kernels

namespace reference {

TokenizedCorpus tokenize_corpus(std::span<const Charter> charters, const Lexicon& lexicon);
PairCounts count_pairs(const Index& index, std::span<const CharterIdx> charters, int window,
                       std::span<const std::uint8_t> focus = {});
std::vector<std::uint64_t> term_context_counts(const Index& index, std::span<const CharterIdx> charters,
                                               std::span<const LemmaId> targets,
                                               std::span<const LemmaId> contexts, int window);
std::vector<std::vector<std::uint64_t>> growth_replicates(std::span<const std::span<const LemmaId>> docs,
                                                          std::span<const std::uint64_t> checkpoints,
                                                          int replicates, std::uint64_t seed);

} // namespace reference

} // namespace cema
