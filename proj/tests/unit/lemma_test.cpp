#include <cema/error.hpp>
#include <cema/lemma.hpp>
#include <cema/random.hpp>

#include <support/fixtures.hpp>

#include <doctest.h>

using namespace cema;
using cema::test::TempDir;
using cema::test::write_file;

using Tokens = std::vector<std::string>;

TEST_CASE("tokenizer keeps letter runs, lowercased")
{
    CHECK(tokenize("In nomine Patris.") == Tokens{"in", "nomine", "patris"});
    CHECK(tokenize("anno DCCCCXXXVII") == Tokens{"anno", "dccccxxxvii"});
    CHECK(tokenize("a1b, c-d 42") == Tokens{"a", "b", "c", "d"});
    CHECK(tokenize("\xC3\x86THELRED") == Tokens{"\xC3\xA6thelred"});
    CHECK(tokenize("").empty());
    CHECK(tokenize(" . , ").empty());
}

TEST_CASE("streaming tokenizer agrees with the list form")
{
    const std::string text = "Ego Rainaldus, gratia Dei abbas; [sic] uendidi.";
    Tokens streamed;
    for_each_token(text, [&](std::string&& t) { streamed.push_back(t); });
    CHECK(streamed == tokenize(text));
}

TEST_CASE("orthographic folding")
{
    CHECK(normalize_form("servicium") == "seruicium");
    CHECK(normalize_form("justicia") == "iusticia");
    CHECK(normalize_form("\xC3\xA6" "cclesia") == "aecclesia");
    CHECK(normalize_form("c\xC5\x93nobium") == "coenobium");
    CHECK(normalize_form("terra") == "terra");
}

TEST_CASE("folding is idempotent")
{
    Rng rng(17);
    const std::vector<std::string> pieces = {"a", "u", "v", "j", "i", "\xC3\xA6", "\xC5\x93", "e", "x"};
    for (int n = 0; n < 1000; ++n) {
        std::string s;
        const auto len = rng.below(12);
        for (std::uint64_t k = 0; k < len; ++k)
            s += pieces[rng.below(pieces.size())];
        const auto once = normalize_form(s);
        CHECK(normalize_form(once) == once);
    }
}

TEST_CASE("lemmatization picks the heaviest candidate and passes unknowns through")
{
    const std::vector<Lexicon::Row> rows = {
        {"est", "sum", 10}, {"uenit", "uenire", 3}, {"uenit", "uenare", 1}, {"Servus", "seruus", 1}};
    const auto lex = Lexicon::from_rows(rows);
    const Tokens forms = {"est", "venit", "seruus", "rainaldus"};
    const auto out = lemmatize(forms, lex);
    REQUIRE(out.size() == 4);
    CHECK(out[0] == LemmatizedToken{"est", "sum", true});
    CHECK(out[1] == LemmatizedToken{"venit", "uenire", true});
    CHECK(out[2].lemma == "seruus");
    CHECK(out[3] == LemmatizedToken{"rainaldus", "rainaldus", false});
}

TEST_CASE("duplicate lexicon rows sum their weights")
{
    const std::vector<Lexicon::Row> rows = {{"a", "x", 3}, {"a", "x", 4}, {"a", "y", 5}};
    const auto lex = Lexicon::from_rows(rows);
    const auto* cands = lex.candidates("a");
    REQUIRE(cands);
    REQUIRE(cands->size() == 2);
    CHECK((*cands)[0] == LemmaCandidate{"x", 7.0});
    CHECK(*lex.best("a") == "x");
}

TEST_CASE("weight ties go to the smallest lemma")
{
    const std::vector<Lexicon::Row> rows = {{"a", "zeta", 2}, {"a", "alpha", 2}};
    CHECK(*Lexicon::from_rows(rows).best("a") == "alpha");
}

TEST_CASE("an empty lexicon is a data error")
{
    CHECK_THROWS_AS(Lexicon::from_rows(std::vector<Lexicon::Row>{}), DataError);
}

TEST_CASE("lexicon file loading skips bad rows with warnings")
{
    TempDir dir;
    write_file(dir / "lex.tsv", "form\tlemma\tweight\n# comment\nest\tsum\t1\nbad\trow\nneg\tx\t-1\nnan\tx\tnan\nuenit\tuenire\t2\r\n");
    std::vector<std::string> warnings;
    const auto lex = Lexicon::load(dir / "lex.tsv", &warnings);
    CHECK(lex.size() == 2);
    CHECK(warnings.size() == 3);
    CHECK(lex.best("neg") == nullptr);
    CHECK(*lex.best("uenit") == "uenire");
}

TEST_CASE("a lexicon of many rows keeps one entry per distinct form")
{
    std::vector<Lexicon::Row> rows;
    for (int i = 0; i < 1000; ++i)
        rows.push_back({test::word(static_cast<std::size_t>(i % 400)), "l" + std::to_string(i % 7), 1.0});
    const auto lex = Lexicon::from_rows(rows);
    CHECK(lex.size() == 400);
    std::size_t candidates = 0;
    for (int i = 0; i < 400; ++i)
        candidates += lex.candidates(test::word(static_cast<std::size_t>(i)))->size();
    std::set<std::pair<std::string, std::string>> distinct;
    for (const auto& r : rows)
        distinct.insert({r.form, r.lemma});
    CHECK(candidates == distinct.size());
}

TEST_CASE("spelling variants lemmatize identically")
{
    const std::vector<Lexicon::Row> rows = {{"iustitia", "iustitia", 1}, {"uilla", "uilla", 1}};
    const auto lex = Lexicon::from_rows(rows);
    const Tokens a = {"justitia", "villa"};
    const Tokens b = {"iustitia", "uilla"};
    const auto la = lemmatize(a, lex);
    const auto lb = lemmatize(b, lex);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(la[i].lemma == lb[i].lemma);
        CHECK(la[i].known);
    }
}
