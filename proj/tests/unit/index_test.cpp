#include <cema/error.hpp>
#include <cema/index.hpp>
#include <cema/random.hpp>

#include <oracles/oracles.hpp>
#include <support/fixtures.hpp>

#include <doctest.h>

#include <fstream>

using namespace cema;
using namespace cema::test;

TEST_CASE("token totals and postings")
{
    const auto index = make_index(std::vector<std::vector<std::string>>{
        {"terra", "aqua", "terra", "et", "terra"}, {"terra", "et", "aqua"}});
    CHECK(index.total_tokens() == 8);
    CHECK(index.charter_count() == 2);
    const auto terra = *index.lemmas().find("terra");
    const auto p = index.postings(terra);
    REQUIRE(p.size() == 4);
    CHECK(p[0] == Posting{0, 0});
    CHECK(p[1] == Posting{0, 2});
    CHECK(p[2] == Posting{0, 4});
    CHECK(p[3] == Posting{1, 0});
    CHECK(index.frequency(terra) == 4);
    CHECK(index.stats().unknown_tokens == 0);
}

TEST_CASE("frequencies and postings agree with a direct count")
{
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const auto docs = random_docs(rng, 30, 40, 60);
        const auto index = make_index(docs);
        const auto expected = oracle::frequencies(lemma_docs(index));
        std::uint64_t sum = 0;
        for (LemmaId l = 0; l < index.lemmas().size(); ++l) {
            CHECK(index.frequency(l) == expected.at(index.lemmas()[l]));
            CHECK(index.postings(l).size() == index.frequency(l));
            for (const auto& post : index.postings(l))
                CHECK(index.lemmas_of(post.charter)[post.position] == l);
            sum += index.frequency(l);
        }
        CHECK(sum == index.total_tokens());
    }
}

TEST_CASE("unknown forms count towards the unknown rate")
{
    Corpus corpus = make_corpus({{{"est", "rainaldus"}, 1000, {}, {}, {}, {}}});
    const std::vector<Lexicon::Row> rows = {{"est", "sum", 1}};
    const auto index = build_index(corpus, Lexicon::from_rows(rows));
    const auto st = index.stats();
    CHECK(st.tokens == 2);
    CHECK(st.unknown_tokens == 1);
    CHECK(st.unknown_rate == doctest::Approx(0.5));
    CHECK(index.lemmas().find("sum"));
    CHECK(index.lemmas().find("rainaldus"));
}

TEST_CASE("charters are ordered by id whatever the input order")
{
    auto corpus = make_corpus({{{"a"}, {}, {}, {}, {}, {}}, {{"b"}, {}, {}, {}, {}, {}}, {{"c"}, {}, {}, {}, {}, {}}});
    const std::vector<Lexicon::Row> rows = {{"a", "a", 1}};
    const auto forward = build_index(corpus, Lexicon::from_rows(rows));
    std::reverse(corpus.charters.begin(), corpus.charters.end());
    const auto backward = build_index(corpus, Lexicon::from_rows(rows));
    CHECK(forward.charter(0).id == "d0000");
    CHECK(backward.charter(0).id == "d0000");
    CHECK(forward.tokens() == backward.tokens());
}

TEST_CASE("duplicate charter ids are a data error")
{
    auto corpus = make_corpus({{{"a"}, {}, {}, {}, {}, {}}, {{"b"}, {}, {}, {}, {}, {}}});
    corpus.charters[1].id = corpus.charters[0].id;
    CHECK_THROWS_AS(build_index(corpus, identity_lexicon({{{"a", "b"}, {}, {}, {}, {}, {}}})), DataError);
}

TEST_CASE("half-century labels")
{
    CHECK(halfcentury_label(937) == "900\xE2\x80\x93" "949");
    CHECK(halfcentury_label(1087) == "1050\xE2\x80\x93" "1099");
    CHECK(halfcentury_label(950) == "950\xE2\x80\x93" "999");
    CHECK(halfcentury_label(-1) == "-50\xE2\x80\x93" "-1");
}

TEST_CASE("half-century slicing")
{
    const auto index = make_index(std::vector<DocSpec>{{{"a", "b"}, 937, {}, {}, {}, {}},
                                                      {{"a"}, 1087, {}, {}, {}, {}},
                                                      {{"a", "a", "a"}, 950, {}, {}, {}, {}},
                                                      {{"b"}, {}, {}, {}, {}, {}},
                                                      {{"c"}, 1200, {}, {}, {}, {}}});
    const auto plan = slice_by_halfcentury(index, 900, 1100);
    REQUIRE(plan.slices.size() == 4);
    CHECK(plan.slices[0].tokens == 2);
    CHECK(plan.slices[1].tokens == 3);
    CHECK(plan.slices[2].tokens == 0);
    CHECK(plan.slices[3].tokens == 1);
    CHECK(plan.slices[3].label == halfcentury_label(1087));
    CHECK(plan.undateable == 1);
    CHECK(plan.out_of_range == 1);
    CHECK(plan.slice_of[3] == -1);
    CHECK(plan.slice_of[0] == 0);
    CHECK_THROWS_AS(slice_by_halfcentury(index, 901, 1100), UsageError);
}

namespace {

Index uniform_docs(int n, int len)
{
    std::vector<DocSpec> docs;
    for (int i = 0; i < n; ++i)
        docs.push_back({std::vector<std::string>(static_cast<std::size_t>(len), "w"), 1000 + i, {}, {}, {}, {}});
    return make_index(docs);
}

} // namespace

TEST_CASE("equal-token slices on equal documents")
{
    const auto index = uniform_docs(10, 10);
    const auto two = slice_equal_tokens(index, 2);
    REQUIRE(two.slices.size() == 2);
    CHECK(two.slices[0].tokens == 50);
    CHECK(two.slices[1].tokens == 50);
    CHECK(two.slices[0].label == "P1");
    const auto one = slice_equal_tokens(index, 1);
    REQUIRE(one.slices.size() == 1);
    CHECK(one.slices[0].tokens == 100);
    CHECK_THROWS_AS(slice_equal_tokens(index, 0), UsageError);
}

TEST_CASE("equal-token slices partition dateable charters within one document of the target")
{
    Rng rng(8);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<DocSpec> docs;
        const auto n = 5 + rng.below(40);
        std::uint64_t max_len = 0;
        for (std::uint64_t i = 0; i < n; ++i) {
            const auto len = 1 + rng.below(30);
            std::optional<Year> year;
            if (rng.below(5)) {
                year = 900 + static_cast<Year>(rng.below(300));
                max_len = std::max(max_len, len);
            }
            docs.push_back({std::vector<std::string>(len, "w"), year, {}, {}, {}, {}});
        }
        const auto index = make_index(docs);
        const int k = 1 + static_cast<int>(rng.below(5));
        SlicePlan plan;
        try {
            plan = slice_equal_tokens(index, k);
        } catch (const UsageError&) {
            continue; // fewer dateable charters than slices
        } catch (const DataError&) {
            continue; // nothing dateable
        }
        std::uint64_t total = 0;
        std::size_t dateable = 0;
        for (CharterIdx c = 0; c < index.charter_count(); ++c)
            if (index.charter(c).dateable()) {
                total += index.token_count(c);
                ++dateable;
                CHECK(plan.slice_of[c] >= 0);
            } else {
                CHECK(plan.slice_of[c] == -1);
            }
        CHECK(plan.total_tokens() == total);
        std::size_t assigned = 0;
        Year last_mid = std::numeric_limits<Year>::min();
        std::uint64_t smallest = std::numeric_limits<std::uint64_t>::max();
        std::uint64_t largest = 0;
        for (const auto& s : plan.slices) {
            assigned += s.charters.size();
            CHECK_FALSE(s.charters.empty());
            smallest = std::min(smallest, s.tokens);
            largest = std::max(largest, s.tokens);
            Year lo = std::numeric_limits<Year>::max();
            Year hi = std::numeric_limits<Year>::min();
            for (auto c : s.charters) {
                lo = std::min(lo, index.charter(c).date->midpoint());
                hi = std::max(hi, index.charter(c).date->midpoint());
            }
            if (!s.charters.empty()) {
                CHECK(lo >= last_mid);
                last_mid = hi;
            }
        }
        CHECK(assigned == dateable);
        CHECK(largest - smallest <= max_len);
    }
}

TEST_CASE("equal-token slices stay within one charter where the greedy fill drifts")
{
    // Greedy filling towards ceil(remaining / slices left) gives 49, 36, 3.
    std::vector<DocSpec> docs;
    const std::vector<std::size_t> lengths = {6, 19, 24, 12, 24, 3};
    for (std::size_t i = 0; i < lengths.size(); ++i)
        docs.push_back({std::vector<std::string>(lengths[i], "w"), 1000 + static_cast<Year>(i), {}, {}, {}, {}});
    const auto plan = slice_equal_tokens(make_index(docs), 3);
    REQUIRE(plan.slices.size() == 3);
    std::uint64_t lo = 1000;
    std::uint64_t hi = 0;
    for (const auto& s : plan.slices) {
        lo = std::min(lo, s.tokens);
        hi = std::max(hi, s.tokens);
    }
    CHECK(hi - lo <= 24);
    CHECK(plan.total_tokens() == 88);
}

TEST_CASE("filters select by metadata and midpoint")
{
    const auto index = make_index(std::vector<DocSpec>{{{"a"}, 1000, std::string("bull"), std::string("north"), {}, {}},
                                                      {{"a"}, 1100, std::string("royal"), std::string("north"), {}, {}},
                                                      {{"a"}, {}, std::string("bull"), {}, {}, {}}});
    CharterFilter f;
    CHECK(select_charters(index, f).size() == 3);
    f.doc_type = "bull";
    CHECK(select_charters(index, f) == std::vector<CharterIdx>{0, 2});
    f.dateable_only = true;
    CHECK(select_charters(index, f) == std::vector<CharterIdx>{0});
    CharterFilter g;
    g.year_lo = 1050;
    CHECK(select_charters(index, g) == std::vector<CharterIdx>{1});
    g.region = "south";
    CHECK(select_charters(index, g).empty());
}

TEST_CASE("index files round-trip and reject corruption")
{
    TempDir dir;
    Rng rng(2);
    auto docs = random_docs(rng, 25, 30, 50);
    std::vector<DocSpec> specs;
    for (std::size_t i = 0; i < docs.size(); ++i)
        specs.push_back({docs[i], i % 3 ? std::optional<Year>(900 + static_cast<Year>(i)) : std::nullopt,
                         std::string("t"), {}, i % 2 ? std::optional<double>(45.0) : std::nullopt,
                         i % 2 ? std::optional<double>(3.5) : std::nullopt});
    const auto index = make_index(specs);
    save_index(index, dir / "index.bin");
    const auto back = load_index(dir / "index.bin");
    CHECK(back.tokens() == index.tokens());
    CHECK(std::equal(back.charters().begin(), back.charters().end(), index.charters().begin(), index.charters().end()));
    CHECK(back.lemmas().size() == index.lemmas().size());
    CHECK(std::equal(back.frequencies().begin(), back.frequencies().end(), index.frequencies().begin()));

    auto bytes = read_file(dir / "index.bin");
    auto bad_magic = bytes;
    bad_magic[0] ^= 0x55;
    write_file(dir / "bad_magic.bin", bad_magic);
    CHECK_THROWS_AS(load_index(dir / "bad_magic.bin"), DataError);
    auto bad_version = bytes;
    bad_version[8] = static_cast<char>(index_format_version + 1);
    write_file(dir / "bad_version.bin", bad_version);
    CHECK_THROWS_AS(load_index(dir / "bad_version.bin"), DataError);
    write_file(dir / "truncated.bin", bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(load_index(dir / "truncated.bin"), DataError);
    CHECK_THROWS_AS(load_index(dir / "absent.bin"), DataError);
}
