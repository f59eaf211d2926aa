#pragma once

#include <cema/index.hpp>
#include <cema/lemma.hpp>
#include <cema/random.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cema::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir()
    {
        static std::uint64_t counter = 0;
        Rng rng(reinterpret_cast<std::uintptr_t>(this) ^ ++counter);
        path_ = std::filesystem::temp_directory_path() / ("cema-test-" + std::to_string(rng.next()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Lowercase letter name for an integer: 0 -> "ba", 1 -> "bb", ...
/// (always two or more letters, never containing v or j).
inline std::string word(std::size_t i)
{
    static const std::string alphabet = "abcdefghiklmnopqrstuwxyz";
    std::string s;
    do {
        s.insert(s.begin(), alphabet[i % alphabet.size()]);
        i /= alphabet.size();
    } while (i);
    return "b" + s;
}

struct DocSpec {
    std::vector<std::string> tokens;
    std::optional<Year> year;
    std::optional<std::string> doc_type;
    std::optional<std::string> region;
    std::optional<double> lat;
    std::optional<double> lon;
};

inline std::string join(const std::vector<std::string>& tokens)
{
    std::string s;
    for (const auto& t : tokens) {
        if (!s.empty())
            s += ' ';
        s += t;
    }
    return s;
}

/// Charters "d0000", "d0001", ... in the given order.
inline Corpus make_corpus(const std::vector<DocSpec>& docs)
{
    Corpus c;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        Charter ch;
        ch.id = "d" + std::string(4 - std::min<std::size_t>(4, std::to_string(i).size()), '0') + std::to_string(i);
        ch.source_corpus = "test";
        ch.text = join(docs[i].tokens);
        if (docs[i].year)
            ch.date = DateRange{*docs[i].year, *docs[i].year};
        ch.doc_type = docs[i].doc_type;
        ch.region = docs[i].region;
        ch.lat = docs[i].lat;
        ch.lon = docs[i].lon;
        c.charters.push_back(std::move(ch));
    }
    return c;
}

/// Every token is its own lemma.
inline Lexicon identity_lexicon(const std::vector<DocSpec>& docs)
{
    std::set<std::string> forms;
    for (const auto& d : docs)
        forms.insert(d.tokens.begin(), d.tokens.end());
    std::vector<Lexicon::Row> rows;
    for (const auto& f : forms)
        rows.push_back({f, f, 1.0});
    if (rows.empty())
        rows.push_back({"placeholder", "placeholder", 1.0});
    return Lexicon::from_rows(rows);
}

inline Index make_index(const std::vector<DocSpec>& docs)
{
    return build_index(make_corpus(docs), identity_lexicon(docs));
}

inline Index make_index(const std::vector<std::vector<std::string>>& docs)
{
    std::vector<DocSpec> specs;
    for (const auto& d : docs)
        specs.push_back({d, {}, {}, {}, {}, {}});
    return make_index(specs);
}

/// Random non-empty documents over a Zipf-ish vocabulary of `vocab` words.
inline std::vector<std::vector<std::string>> random_docs(Rng& rng, std::size_t docs, std::size_t max_len,
                                                         std::size_t vocab)
{
    std::vector<std::vector<std::string>> out(docs);
    for (auto& d : out) {
        const auto len = 1 + rng.below(max_len);
        for (std::uint64_t k = 0; k < len; ++k) {
            // Squaring a uniform skews towards small ids.
            const double u = rng.uniform();
            d.push_back(word(static_cast<std::size_t>(u * u * static_cast<double>(vocab))));
        }
    }
    return out;
}

/// Lemma strings of an index's charters, in index order.
inline std::vector<std::vector<std::string>> lemma_docs(const Index& index)
{
    std::vector<std::vector<std::string>> out;
    for (CharterIdx c = 0; c < index.charter_count(); ++c) {
        std::vector<std::string> d;
        for (auto l : index.lemmas_of(c))
            d.push_back(index.lemmas()[l]);
        out.push_back(std::move(d));
    }
    return out;
}

} // namespace cema::test
