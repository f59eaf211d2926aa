#pragma once

#include <cema/charter.hpp>
#include <cema/lemma.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cema {

/// Generator of a charter corpus with planted, recoverable signals:
/// typology-specific lemmas, region-exclusive lemmas with clustered
/// coordinates, a pivot/target adjacency rate rising linearly with the date,
/// and a lemma whose regional rate peaks early in one region and late in the
/// other.
struct SynthParams {
    std::size_t charters = 2000;
    std::size_t min_tokens = 80;
    std::size_t max_tokens = 320;
    Year year_lo = 1000;
    Year year_hi = 1249;
    std::size_t background_lemmas = 800;
    double class_rate = 0.12;      // share of tokens drawn from the class lexicon
    double region_rate = 0.01;     // share drawn from the regional lexicon
    double name_rate = 0.015;      // personal names absent from the lexicon
    double unlabeled_share = 0.15;
    double undated_share = 0.05;
    double unlocated_share = 0.03;
    double coord_sd = 1.0;         // degrees
    double pair_rate_lo = 0.1;     // pivot followed by target, at year_lo
    double pair_rate_hi = 0.9;     // ... and at year_hi
    std::uint64_t seed = 20240601;
};

struct SynthTruth {
    std::string id;
    std::string type;
    std::string region;
    Year year = 0;
};

struct SynthCorpus {
    Corpus corpus;
    std::vector<Lexicon::Row> lexicon;
    std::vector<SynthTruth> truth;
};

namespace synth {
inline const std::vector<std::string> types{"bull", "episcopal", "royal"};
inline const std::vector<std::string> regions{"north", "south"};
inline constexpr double region_split_lat = 46.5; // north above, south below
inline constexpr const char* pivot = "memoria";
inline constexpr const char* target = "tempus";
inline constexpr const char* peak_lemma = "grangia";
const std::vector<std::string>& class_lemmas(const std::string& type);
const std::vector<std::string>& regional_lemmas(const std::string& region);
} // namespace synth

SynthCorpus generate_synthetic(const SynthParams& params = {});

/// Writes charters.jsonl, lexicon.tsv, centroids.csv and truth.csv.
void write_synthetic(const SynthCorpus& corpus, const std::filesystem::path& dir);

} // namespace cema
