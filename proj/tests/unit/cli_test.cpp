#include <cema/csv.hpp>
#include <cema/ingest.hpp>

#include <support/cli_run.hpp>
#include <support/fixtures.hpp>

#include <doctest.h>

#include <json.hpp>

using namespace cema;
using namespace cema::test;

namespace fs = std::filesystem;

namespace {

const Workspace& workspace()
{
    static TempDir dir;
    static const Workspace w = [] {
        SynthParams p;
        p.charters = 300;
        p.seed = 17;
        return prepare_workspace(dir.path(), p);
    }();
    REQUIRE_FALSE(w.root.empty());
    return w;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path)
{
    return parse_csv(read_file(path));
}

std::vector<std::string> with(std::vector<std::string> base, const std::vector<std::string>& more)
{
    base.insert(base.end(), more.begin(), more.end());
    return base;
}

} // namespace

TEST_CASE("usage errors exit with 1")
{
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"frobnicate"}).code == 1);
    CHECK(run_cli({"stats", "--index", "x.bin"}).code == 1); // no --out
    TempDir dir;
    CHECK(run_cli({"stats", "--index", "x.bin", "--out", dir.path().string(), "--bogus"}).code == 1);
    CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("missing inputs exit with 2")
{
    TempDir dir;
    const auto r = run_cli({"stats", "--index", (dir / "absent.bin").string(), "--out", (dir / "o").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("error") != std::string::npos);
    CHECK(run_cli({"ingest", (dir / "absent.jsonl").string(), "--out", (dir / "o").string()}).code == 2);
}

TEST_CASE("ingest writes the merged corpus and a reject report")
{
    TempDir dir;
    write_file(dir / "a.jsonl", "{\"id\":\"c1\",\"text\":\"in nomine\"}\nnot json\n{\"id\":\"c2\",\"text\":\"dei\"}\n");
    write_file(dir / "b.jsonl", "{\"id\":\"c1\",\"text\":\"alia\"}\n");
    const auto r = run_cli({"ingest", (dir / "a.jsonl").string(), (dir / "b.jsonl").string(), "--out",
                            (dir / "out").string()});
    REQUIRE(r.code == 0);
    const auto corpus = load_corpus(dir / "out/corpus.jsonl");
    REQUIRE(corpus.charters.size() == 3);
    CHECK(corpus.charters[0].id == "a:c1");
    const auto rejects = read_csv(dir / "out/rejects.csv");
    CHECK(rejects.size() == 2);
    CHECK(fs::exists(dir / "out/manifest.json"));
}

TEST_CASE("stats and lemmatize")
{
    const auto& w = workspace();
    TempDir dir;
    REQUIRE(run_cli({"stats", "--index", w.index.string(), "--out", (dir / "stats").string()}).code == 0);
    REQUIRE(run_cli({"lemmatize", "--corpus", w.corpus.string(), "--lexicon", (w.raw / "lexicon.tsv").string(),
                     "--out", (dir / "lem").string()})
                .code == 0);
    const auto unknown = read_csv(dir / "lem/unknown_forms.csv");
    REQUIRE(unknown.size() > 2);
    CHECK(std::stoull(unknown[1][1]) >= std::stoull(unknown[2][1]));
}

TEST_CASE("richness reports every package for every corpus")
{
    const auto& w = workspace();
    TempDir dir;
    REQUIRE(run_cli({"richness", "--index", w.index.string(), "--by", "doc_type", "--replicates", "3", "--out",
                     dir.path().string()})
                .code == 0);
    const auto rows = read_csv(dir / "richness.csv");
    REQUIRE(rows.size() == 1 + 3 * 3);
    std::map<std::string, int> per_corpus;
    for (std::size_t i = 1; i < rows.size(); ++i)
        ++per_corpus[rows[i][0]];
    CHECK(per_corpus.size() == 3);
    for (const auto& [name, n] : per_corpus)
        CHECK(n == 3);
}

TEST_CASE("analysis subcommands produce their tables")
{
    const auto& w = workspace();
    TempDir dir;
    const auto idx = w.index.string();
    auto out = [&](const std::string& name) { return (dir / name).string(); };
    REQUIRE(run_cli({"timeline", "--index", idx, "--lemma", "grangia", "--by-region", "--out", out("tl")}).code == 0);
    CHECK(read_csv(dir / "tl/timeline.csv").size() == 6);
    CHECK(fs::exists(dir / "tl/peaks.csv"));
    REQUIRE(run_cli({"cooc", "--index", idx, "--pivot", "memoria", "--k", "5", "--out", out("cooc")}).code == 0);
    const auto cooc = read_csv(dir / "cooc/cooc.csv");
    REQUIRE(cooc.size() == 6);
    CHECK(cooc[1][1] == "tempus");
    REQUIRE(run_cli({"geo", "--index", idx, "--lemma", "finagium", "--out", out("geo")}).code == 0);
    REQUIRE(run_cli({"--svg", "ca", "--index", idx, "--rows", "doc_type", "--out", out("ca")}).code == 0);
    CHECK(fs::exists(dir / "ca/ca.svg"));
    REQUIRE(run_cli({"cluster", "--coords", out("ca") + "/ca_cols.csv", "--k", "3", "--out", out("cl")}).code == 0);
    REQUIRE(run_cli({"train", "--index", idx, "--kind", "bayes", "--out", out("model")}).code == 0);
    REQUIRE(run_cli({"screen", "--index", idx, "--model", out("model") + "/model.json", "--target", "bull", "--out",
                     out("screen")})
                .code == 0);
    const auto absent = run_cli({"timeline", "--index", idx, "--lemma", "nonexistentlemma", "--out", out("none")});
    CHECK(absent.code == 0);
    CHECK(absent.err.find("nonexistentlemma") != std::string::npos);
    CHECK(run_cli({"geo", "--index", idx, "--lemma", "nonexistentlemma", "--out", out("nogeo")}).code == 2);
}

TEST_CASE("JSON output format")
{
    const auto& w = workspace();
    TempDir dir;
    REQUIRE(run_cli({"--format", "json", "stats", "--index", w.index.string(), "--out", dir.path().string()}).code ==
            0);
    bool found = false;
    for (const auto& e : fs::directory_iterator(dir.path()))
        if (e.path().extension() == ".json" && e.path().filename() != "manifest.json") {
            CHECK_NOTHROW(nlohmann::json::parse(read_file(e.path())));
            found = true;
        }
    CHECK(found);
}

TEST_CASE("replay reproduces the outputs byte for byte at other thread counts")
{
    const auto& w = workspace();
    TempDir dir;
    REQUIRE(run_cli({"--threads", "1", "cooc", "--index", w.index.string(), "--pivot", "memoria", "--out",
                     (dir / "first").string()})
                .code == 0);
    const auto manifest = nlohmann::json::parse(read_file(dir / "first/manifest.json"));
    CHECK(manifest["subcommand"] == "cooc");
    CHECK(manifest["inputs"].size() == 1);
    for (int t : {2, 5}) {
        const auto again = dir / ("again" + std::to_string(t));
        REQUIRE(run_cli({"--threads", std::to_string(t), "replay", (dir / "first/manifest.json").string(), "--out",
                         again.string()})
                    .code == 0);
        CHECK(read_file(again / "cooc.csv") == read_file(dir / "first/cooc.csv"));
    }
}

TEST_CASE("replay refuses changed inputs")
{
    TempDir dir;
    write_file(dir / "a.jsonl", "{\"id\":\"c1\",\"text\":\"in nomine\"}\n");
    REQUIRE(run_cli({"ingest", (dir / "a.jsonl").string(), "--out", (dir / "out").string()}).code == 0);
    write_file(dir / "a.jsonl", "{\"id\":\"c1\",\"text\":\"changed\"}\n");
    CHECK(run_cli({"replay", (dir / "out/manifest.json").string()}).code == 2);
}
