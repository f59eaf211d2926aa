#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cema {

/// Maximal runs of Unicode letters, lowercased, in text order.
std::vector<std::string> tokenize(std::string_view text);

/// Calls `fn(std::string&&)` for every token without materializing the list.
template <class Fn>
void for_each_token(std::string_view text, Fn&& fn);

/// Orthographic folding for medieval Latin: v->u, j->i, ae/oe ligatures
/// expanded. Input is expected lowercase. Idempotent.
std::string normalize_form(std::string_view form);

struct LemmaCandidate {
    std::string lemma;
    double weight = 0.0;

    friend bool operator==(const LemmaCandidate&, const LemmaCandidate&) = default;
};

/// Form -> candidate lemmas. Keys are normalized; lists are never empty.
class Lexicon {
public:
    struct Row {
        std::string form;
        std::string lemma;
        double weight = 0.0;
    };

    /// Builds from rows; duplicate (form, lemma) pairs sum their weights.
    /// Throws DataError when no row survives.
    static Lexicon from_rows(std::span<const Row> rows);

    /// TSV `form<TAB>lemma<TAB>weight`. An optional header line and `#`
    /// comments are skipped. Malformed rows and negative or non-finite weights
    /// are dropped with a message appended to `warnings`.
    static Lexicon load(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

    /// Candidates for an already normalized form, or nullptr.
    const std::vector<LemmaCandidate>* candidates(const std::string& normalized) const;

    /// Highest-weight lemma, ties to the lexicographically smallest; nullptr
    /// when the form is not in the lexicon.
    const std::string* best(const std::string& normalized) const;

    std::size_t size() const noexcept { return entries_.size(); }

private:
    struct Entry {
        std::vector<LemmaCandidate> candidates; // sorted by lemma
        std::size_t best = 0;
    };
    std::unordered_map<std::string, Entry> entries_;
};

struct LemmatizedToken {
    std::string form;  // lowercased surface form
    std::string lemma; // normalized form itself when unknown
    bool known = false;

    friend bool operator==(const LemmatizedToken&, const LemmatizedToken&) = default;
};

std::vector<LemmatizedToken> lemmatize(std::span<const std::string> forms, const Lexicon& lexicon);

} // namespace cema

#include <cema/detail/tokenize_impl.hpp>
