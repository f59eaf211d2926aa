#include <cema/error.hpp>
#include <cema/ingest.hpp>
#include <cema/random.hpp>

#include <support/fixtures.hpp>

#include <doctest.h>

#include <algorithm>
#include <sstream>

using namespace cema;
using cema::test::TempDir;
using cema::test::write_file;

TEST_CASE("one malformed JSONL line is rejected, the rest kept")
{
    std::istringstream in(R"({"id":"c1","text":"in nomine","not_before":937,"not_after":937}
{"id":"c2","text":
{"id":"c3","text":"dei","region":"Bourgogne"}
)");
    const auto batch = read_jsonl(in, "A");
    REQUIRE(batch.charters.size() == 2);
    REQUIRE(batch.rejects.size() == 1);
    CHECK(batch.rejects[0].record == "line 2");
    CHECK(batch.charters[0].id == "c1");
    CHECK(batch.charters[0].date->midpoint() == 937);
    CHECK(batch.charters[0].source_corpus == "A");
    CHECK(batch.charters[1].region == "Bourgogne");
}

TEST_CASE("empty input is an empty batch")
{
    std::istringstream in("");
    const auto batch = read_jsonl(in, "A");
    CHECK(batch.charters.empty());
    CHECK(batch.rejects.empty());
}

TEST_CASE("validation failures and duplicate ids become rejects")
{
    std::istringstream in(R"({"id":"c1","text":"a","not_before":1100,"not_after":1050}
{"id":"c2","text":"a","lat":[1]}
{"id":"c3","text":"a"}
{"id":"c3","text":"b"}
)");
    const auto batch = read_jsonl(in, "A");
    REQUIRE(batch.charters.size() == 1);
    REQUIRE(batch.rejects.size() == 3);
    CHECK(batch.rejects[0].reason == "date interval inverted");
    CHECK(batch.rejects[1].field == "lat");
    CHECK(batch.rejects[2].record == "c3");
}

TEST_CASE("TSV rows read their text from the text directory")
{
    TempDir dir;
    write_file(dir / "meta.tsv", "id\tnot_before\tnot_after\tdoc_type\tfolio\nt1\t1000\t1010\tbull\t3r\nt2\t1000\t1000\troyal\t4v\n");
    write_file(dir / "texts/t1.txt", "in nomine [fol. 2r] domini\n");
    const auto batch = read_corpus(dir / "meta.tsv", InputFormat::tsv);
    CHECK(batch.source == "meta");
    REQUIRE(batch.charters.size() == 1);
    CHECK(batch.charters[0].text == "in nomine domini");
    CHECK(batch.charters[0].doc_type == "bull");
    CHECK(batch.charters[0].extra.at("folio") == "\"3r\"");
    REQUIRE(batch.rejects.size() == 1);
    CHECK(batch.rejects[0].record == "t2");
    CHECK(batch.rejects[0].reason == "text file absent");
}

TEST_CASE("TSV row with the wrong column count is rejected")
{
    TempDir dir;
    std::istringstream in("id\tregion\nt1\n");
    const auto batch = read_tsv(in, "m", dir.path());
    CHECK(batch.charters.empty());
    REQUIRE(batch.rejects.size() == 1);
    CHECK(batch.rejects[0].record == "row 2");
}

TEST_CASE("a missing input file is a data error")
{
    TempDir dir;
    CHECK_THROWS_AS(read_corpus(dir / "absent.jsonl", InputFormat::jsonl), DataError);
}

TEST_CASE("clean_text drops editorial insertions and collapses whitespace")
{
    CHECK(clean_text("in   nomine\t[fol. 2r] dei") == "in nomine dei");
    CHECK(clean_text("a [b [c] d] e") == "a e");
    CHECK(clean_text("a ] b [ c") == "a b c");
    CHECK(clean_text("  x\x01y \n") == "xy");
    CHECK(clean_text("caf\xC3\xA9 \xFF ok") == "caf\xC3\xA9 ok");
    CHECK(clean_text("") == "");
}

TEST_CASE("clean_text is idempotent")
{
    Rng rng(5);
    const std::string alphabet = "ab [] \t\n\x02\xC3\xA9\xFFxyz.";
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        const auto len = rng.below(40);
        for (std::uint64_t k = 0; k < len; ++k)
            s += alphabet[rng.below(alphabet.size())];
        const auto once = clean_text(s);
        CHECK(clean_text(once) == once);
    }
}

namespace {

Charter charter(std::string id, std::string text, Year year)
{
    Charter c;
    c.id = std::move(id);
    c.text = std::move(text);
    c.date = DateRange{year, year};
    return c;
}

CorpusBatch batch(std::string source, std::vector<Charter> charters)
{
    for (auto& c : charters)
        c.source_corpus = source;
    return CorpusBatch{std::move(source), std::move(charters), {}};
}

} // namespace

TEST_CASE("merging disjoint batches keeps every charter")
{
    const auto corpus = merge_corpora({batch("A", {charter("a1", "x", 1000)}), batch("B", {charter("b1", "y", 1000)})});
    REQUIRE(corpus.charters.size() == 2);
    CHECK(corpus.charters[0].id == "a1");
    CHECK(corpus.charters[1].id == "b1");
    CHECK(corpus.charters[0].provenance == std::vector<std::string>{"A:a1"});
}

TEST_CASE("exact duplicates collapse with provenance")
{
    const auto corpus =
        merge_corpora({batch("B", {charter("x9", "same text", 1000)}), batch("A", {charter("c1", "same text", 1000)})});
    REQUIRE(corpus.charters.size() == 1);
    CHECK(corpus.charters[0].id == "c1");
    CHECK(corpus.charters[0].provenance == std::vector<std::string>{"A:c1", "B:x9"});
}

TEST_CASE("same text with a different date is not a duplicate")
{
    const auto corpus = merge_corpora({batch("A", {charter("c1", "t", 1000)}), batch("B", {charter("c2", "t", 1001)})});
    CHECK(corpus.charters.size() == 2);
}

TEST_CASE("colliding ids get a source prefix")
{
    const auto corpus = merge_corpora({batch("A", {charter("c1", "one", 1000)}), batch("B", {charter("c1", "two", 1000)})});
    REQUIRE(corpus.charters.size() == 2);
    CHECK(corpus.charters[0].id == "A:c1");
    CHECK(corpus.charters[1].id == "B:c1");
}

TEST_CASE("merge does not depend on batch order")
{
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<CorpusBatch> batches;
        for (int b = 0; b < 4; ++b) {
            std::vector<Charter> cs;
            const auto n = rng.below(6);
            for (std::uint64_t i = 0; i < n; ++i)
                cs.push_back(charter("c" + std::to_string(rng.below(5)), "t" + std::to_string(rng.below(4)),
                                     1000 + static_cast<Year>(rng.below(2))));
            std::sort(cs.begin(), cs.end(), [](const Charter& x, const Charter& y) { return x.id < y.id; });
            cs.erase(std::unique(cs.begin(), cs.end(), [](const Charter& x, const Charter& y) { return x.id == y.id; }),
                     cs.end());
            batches.push_back(batch(std::string(1, static_cast<char>('A' + b)), std::move(cs)));
        }
        const auto expected = merge_corpora(batches);
        auto shuffled = batches;
        rng.shuffle(std::span(shuffled));
        const auto got = merge_corpora(shuffled);
        CHECK(got.charters == expected.charters);
        std::set<std::string> ids;
        for (const auto& c : got.charters)
            ids.insert(c.id);
        CHECK(ids.size() == got.charters.size());
    }
}

TEST_CASE("corpus files round-trip")
{
    TempDir dir;
    Corpus corpus;
    corpus.charters.push_back(charter("c1", "in nomine", 937));
    corpus.charters[0].lat = 46.25;
    corpus.charters[0].lon = 4.5;
    corpus.charters[0].provenance = {"A:c1", "B:c7"};
    corpus.charters.push_back(charter("c2", "dei", 1001));
    for (auto& c : corpus.charters)
        c.source_corpus = "A";
    corpus.charters[1].extra["seal"] = "{\"kind\":\"wax\"}";
    {
        std::ofstream out(dir / "corpus.jsonl", std::ios::binary);
        write_corpus_jsonl(out, corpus);
    }
    const auto back = load_corpus(dir / "corpus.jsonl");
    CHECK(back.charters == corpus.charters);
}
