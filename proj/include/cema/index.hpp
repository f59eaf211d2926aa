#pragma once

#include <cema/charter.hpp>
#include <cema/lemma.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cema {

using LemmaId = std::uint32_t;
using FormId = std::uint32_t;
using CharterIdx = std::uint32_t;

/// Sorted, deduplicated string table with dense ids.
class Vocabulary {
public:
    Vocabulary() = default;
    /// Sorts and deduplicates.
    explicit Vocabulary(std::vector<std::string> strings);

    std::optional<std::uint32_t> find(std::string_view s) const;
    const std::string& operator[](std::uint32_t id) const { return strings_[id]; }
    std::size_t size() const noexcept { return strings_.size(); }
    std::span<const std::string> strings() const noexcept { return strings_; }

private:
    std::vector<std::string> strings_;
    std::unordered_map<std::string, std::uint32_t> ids_;
};

struct Posting {
    CharterIdx charter;
    std::uint32_t position; // token offset inside the charter

    friend bool operator==(const Posting&, const Posting&) = default;
};

/// Flat token store: tokens of charter i live in [offsets[i], offsets[i+1]).
struct TokenStore {
    std::vector<std::uint64_t> offsets{0};
    std::vector<LemmaId> lemmas;
    std::vector<FormId> forms;

    friend bool operator==(const TokenStore&, const TokenStore&) = default;
};

struct IndexStats {
    std::size_t charters = 0;
    std::size_t dateable = 0;
    std::size_t located = 0;
    std::uint64_t tokens = 0;
    std::size_t lemmas = 0;
    std::size_t forms = 0;
    std::uint64_t unknown_tokens = 0;
    double unknown_rate = 0.0;
};

/// The queryable corpus. Charters are ordered by id; vocabularies are sorted,
/// so ids do not depend on input order or thread count.
class Index {
public:
    Index() = default;
    /// Checks consistency and derives frequencies and postings.
    Index(std::vector<Charter> charters, Vocabulary lemmas, Vocabulary forms,
          std::vector<std::uint8_t> form_known, TokenStore tokens);

    std::span<const Charter> charters() const noexcept { return charters_; }
    const Charter& charter(CharterIdx i) const { return charters_[i]; }
    std::size_t charter_count() const noexcept { return charters_.size(); }
    std::optional<CharterIdx> find_charter(std::string_view id) const;

    const Vocabulary& lemmas() const noexcept { return lemmas_; }
    const Vocabulary& forms() const noexcept { return forms_; }
    bool form_known(FormId f) const { return form_known_[f] != 0; }
    std::span<const std::uint8_t> form_known_flags() const noexcept { return form_known_; }
    const TokenStore& tokens() const noexcept { return tokens_; }

    std::span<const LemmaId> lemmas_of(CharterIdx c) const;
    std::span<const FormId> forms_of(CharterIdx c) const;
    std::uint64_t token_count(CharterIdx c) const;
    std::uint64_t total_tokens() const noexcept { return tokens_.lemmas.size(); }

    std::uint64_t frequency(LemmaId l) const { return lemma_freq_[l]; }
    std::span<const std::uint64_t> frequencies() const noexcept { return lemma_freq_; }
    std::span<const Posting> postings(LemmaId l) const;

    /// Lemma ids for names; names not in the vocabulary go to `missing`.
    std::vector<LemmaId> resolve(std::span<const std::string> names,
                                 std::vector<std::string>* missing = nullptr) const;

    IndexStats stats() const;

private:
    std::vector<Charter> charters_;
    std::unordered_map<std::string, CharterIdx> charter_ids_;
    Vocabulary lemmas_;
    Vocabulary forms_;
    std::vector<std::uint8_t> form_known_;
    TokenStore tokens_;
    std::vector<std::uint64_t> lemma_freq_;
    std::vector<std::uint64_t> posting_offsets_;
    std::vector<Posting> postings_;
};

/// Tokenizes and lemmatizes every charter (OpenMP over charters) and builds
/// the index. Duplicate charter ids are a DataError.
Index build_index(const Corpus& corpus, const Lexicon& lexicon);

inline constexpr std::uint32_t index_format_version = 1;

void save_index(const Index& index, const std::filesystem::path& path);
/// Throws DataError on a bad magic, a version mismatch or a truncated file.
Index load_index(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Charter selection and temporal slicing

/// Conjunction of metadata constraints; unset members match everything.
struct CharterFilter {
    std::optional<std::string> doc_type;
    std::optional<std::string> region;
    std::optional<std::string> institution;
    std::optional<std::string> source_corpus;
    std::optional<Year> year_lo; // inclusive, on the midpoint year
    std::optional<Year> year_hi; // inclusive
    bool dateable_only = false;

    bool matches(const Charter& c) const;
    bool empty() const;
};

std::vector<CharterIdx> select_charters(const Index& index, const CharterFilter& filter);

enum class SliceKind { halfcentury, equal_tokens };

struct Slice {
    std::string label;
    std::vector<CharterIdx> charters; // ascending
    std::uint64_t tokens = 0;
};

struct SlicePlan {
    SliceKind kind = SliceKind::halfcentury;
    std::vector<Slice> slices;
    std::size_t undateable = 0;   // excluded: no date
    std::size_t out_of_range = 0; // excluded: midpoint outside the range
    std::vector<std::int32_t> slice_of; // per charter, -1 when unassigned

    std::uint64_t total_tokens() const;
};

/// Bins [50k, 50k+49] over the half-open range [year_lo, year_hi); both bounds
/// must be multiples of 50. Empty bins are kept so series share an axis.
SlicePlan slice_by_halfcentury(const Index& index, Year year_lo, Year year_hi,
                               const CharterFilter& filter = {});

/// k slices P1..Pk of consecutive dateable charters (ordered by midpoint, then
/// id) holding roughly equal token counts.
SlicePlan slice_equal_tokens(const Index& index, int k, const CharterFilter& filter = {});

/// "900–949" style label of the half-century containing `year`.
std::string halfcentury_label(Year year);

} // namespace cema
