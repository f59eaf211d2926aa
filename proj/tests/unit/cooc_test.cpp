#include <cema/cooc.hpp>
#include <cema/error.hpp>
#include <cema/random.hpp>

#include <oracles/oracles.hpp>
#include <support/fixtures.hpp>

#include <doctest.h>

using namespace cema;
using namespace cema::test;

namespace {

LemmaId id(const Index& index, const std::string& lemma)
{
    return *index.lemmas().find(lemma);
}

PairTable full_table(const Index& index, int window)
{
    PairTableOptions opt;
    opt.window = window;
    return pair_table(index, opt);
}

void check_against_oracle(const Index& index, const PairTable& table, int window)
{
    const auto expected = oracle::enumerate_pairs(lemma_docs(index), window);
    CHECK(table.events() == expected.events);
    std::uint64_t stored = 0;
    for (const auto& p : table.pairs()) {
        const auto key = std::make_pair(index.lemmas()[p.first], index.lemmas()[p.second]);
        REQUIRE(expected.pairs.count(key));
        CHECK(p.count == expected.pairs.at(key));
        ++stored;
    }
    CHECK(stored == expected.pairs.size());
    for (LemmaId l = 0; l < index.lemmas().size(); ++l) {
        const auto it = expected.marginals.find(index.lemmas()[l]);
        CHECK(table.marginal(l) == (it == expected.marginals.end() ? 0 : it->second));
    }
}

} // namespace

TEST_CASE("events of a three-token charter")
{
    const auto index = make_index(std::vector<std::vector<std::string>>{{"a", "b", "c"}});
    const auto t = full_table(index, 1);
    const auto a = id(index, "a"), b = id(index, "b"), c = id(index, "c");
    CHECK(t.events() == 2);
    CHECK(t.count(a, b) == 1);
    CHECK(t.count(b, a) == 1);
    CHECK(t.count(b, c) == 1);
    CHECK(t.count(a, c) == 0);
    CHECK(t.marginal(a) == 1);
    CHECK(t.marginal(b) == 2);
    CHECK(t.marginal(c) == 1);
    const auto dice = associate(t, a, b, Measure::dice);
    CHECK(dice.value == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(associate(t, a, c, Measure::dice).value == 0.0);
}

TEST_CASE("a one-token charter has no events")
{
    const auto index = make_index(std::vector<std::vector<std::string>>{{"a"}});
    for (int w : {1, 5, 100}) {
        const auto t = full_table(index, w);
        CHECK(t.events() == 0);
        CHECK(t.pairs().empty());
    }
}

TEST_CASE("repeated lemmas and same-lemma events")
{
    const auto index = make_index(std::vector<std::vector<std::string>>{{"a", "b", "a"}});
    const auto t = full_table(index, 2);
    const auto a = id(index, "a"), b = id(index, "b");
    CHECK(t.count(a, b) == 2);
    CHECK(t.count(a, a) == 1);
    CHECK(t.events() == 3);
    CHECK(t.marginal(a) == 4);
    CHECK(t.marginal(b) == 2);
}

TEST_CASE("pair tables agree with exhaustive enumeration")
{
    Rng rng(31);
    for (int trial = 0; trial < 15; ++trial) {
        const auto docs = random_docs(rng, 20, 60, 40);
        const auto index = make_index(docs);
        const int w = 1 + static_cast<int>(rng.below(12));
        const auto t = full_table(index, w);
        check_against_oracle(index, t, w);
        std::uint64_t marginal_sum = 0;
        for (LemmaId l = 0; l < index.lemmas().size(); ++l)
            marginal_sum += t.marginal(l);
        CHECK(marginal_sum == 2 * t.events());
    }
}

TEST_CASE("focused tables store only pairs touching the focus")
{
    Rng rng(32);
    const auto index = make_index(random_docs(rng, 30, 40, 20));
    const auto full = full_table(index, 4);
    PairTableOptions opt;
    opt.window = 4;
    opt.focus = std::vector<LemmaId>{0, 3};
    const auto focused = pair_table(index, opt);
    CHECK(focused.events() == full.events());
    for (LemmaId l = 0; l < index.lemmas().size(); ++l)
        CHECK(focused.marginal(l) == full.marginal(l));
    for (const auto& p : focused.pairs()) {
        CHECK((p.first == 0 || p.first == 3 || p.second == 0 || p.second == 3));
        CHECK(p.count == full.count(p.first, p.second));
    }
    CHECK(focused.covers(0, 7));
    CHECK_FALSE(focused.covers(5, 7));
    CHECK_THROWS_AS(associate(focused, 5, 7, Measure::dice), UsageError);
}

TEST_CASE("window validation")
{
    const auto index = make_index(std::vector<std::vector<std::string>>{{"a", "b"}});
    CHECK_THROWS_AS(full_table(index, 0), UsageError);
    PairTableOptions opt;
    opt.filter.doc_type = "none";
    CHECK_THROWS_AS(pair_table(index, opt), DataError);
}

TEST_CASE("association measures are symmetric and bounded")
{
    Rng rng(33);
    for (int trial = 0; trial < 5; ++trial) {
        const auto index = make_index(random_docs(rng, 25, 50, 30));
        const auto t = full_table(index, 3);
        for (LemmaId x = 0; x < index.lemmas().size(); ++x)
            for (LemmaId y = 0; y < index.lemmas().size(); ++y) {
                if (t.marginal(x) + t.marginal(y) == 0)
                    continue;
                const auto d1 = associate(t, x, y, Measure::dice).value;
                const auto d2 = associate(t, y, x, Measure::dice).value;
                CHECK(d1 == d2);
                CHECK(d1 >= 0.0);
                CHECK(d1 <= 1.0);
                const auto l1 = associate(t, x, y, Measure::llr).value;
                CHECK(l1 >= -1e-9);
                CHECK(l1 == doctest::Approx(associate(t, y, x, Measure::llr).value));
            }
    }
}

TEST_CASE("log-likelihood ratio of a 2x2 table")
{
    CHECK(log_likelihood_ratio(10, 10, 10, 10) == doctest::Approx(0.0));
    // [[10, 0], [0, 10]]: G2 = 2 * 20 * log 2
    CHECK(log_likelihood_ratio(10, 0, 0, 10) == doctest::Approx(40.0 * std::log(2.0)));
    CHECK(log_likelihood_ratio(-1, 0, 0, 0) == 0.0);
    CHECK(parse_measure("llr") == Measure::llr);
    CHECK_THROWS_AS(parse_measure("pmi"), UsageError);
}

TEST_CASE("ranking co-occurrents")
{
    std::vector<std::vector<std::string>> docs;
    Rng rng(34);
    for (int d = 0; d < 60; ++d) {
        std::vector<std::string> doc;
        for (int k = 0; k < 30; ++k)
            doc.push_back(word(rng.below(50)));
        const auto pos = rng.below(doc.size());
        doc.insert(doc.begin() + static_cast<std::ptrdiff_t>(pos), {"memoria", "oblivio"});
        docs.push_back(doc);
    }
    docs.push_back({"solus", "socius"});
    const auto index = make_index(docs);
    PairTableOptions opt;
    opt.window = 1;
    const auto t = pair_table(index, opt);

    RankingOptions rank;
    rank.k = 5;
    const auto top = top_cooccurrents(t, index, id(index, "memoria"), rank);
    REQUIRE(top.size() == 5);
    CHECK(index.lemmas()[top[0].target] == "oblivio");
    for (std::size_t i = 1; i < top.size(); ++i)
        CHECK(top[i - 1].value >= top[i].value);
    for (const auto& s : top)
        CHECK(s.target != id(index, "memoria"));

    rank.stoplist = {id(index, "oblivio")};
    CHECK(index.lemmas()[top_cooccurrents(t, index, id(index, "memoria"), rank)[0].target] != "oblivio");

    const auto single = top_cooccurrents(t, index, id(index, "solus"), RankingOptions{});
    REQUIRE(single.size() == 1);
    CHECK(index.lemmas()[single[0].target] == "socius");

    rank.k = 0;
    CHECK(top_cooccurrents(t, index, id(index, "memoria"), rank).empty());
}

TEST_CASE("second-order matrices")
{
    // Two topics that never share a charter, both around the pivot.
    std::vector<std::vector<std::string>> docs;
    Rng rng(35);
    const std::vector<std::string> water = {"aqua", "riuus", "piscaria", "molendinum"};
    const std::vector<std::string> land = {"terra", "uinea", "pratum", "campus"};
    for (int d = 0; d < 80; ++d) {
        const auto& topic = d % 2 ? water : land;
        std::vector<std::string> doc;
        for (int k = 0; k < 12; ++k) {
            doc.push_back(topic[rng.below(topic.size())]);
            if (k % 4 == 0)
                doc.push_back("pivot");
        }
        docs.push_back(doc);
    }
    const auto index = make_index(docs);
    RankingOptions rank;
    rank.k = 8;
    PairTableOptions opt;
    opt.window = 3;
    const auto m = second_order(index, id(index, "pivot"), rank, opt);
    REQUIRE(m.terms.size() == 8);
    auto topic_of = [&](LemmaId l) {
        const auto& s = index.lemmas()[l];
        return std::find(water.begin(), water.end(), s) != water.end() ? 0 : 1;
    };
    double within_min = 1.0, across_max = 0.0;
    for (std::size_t i = 0; i < m.terms.size(); ++i)
        for (std::size_t j = 0; j < m.terms.size(); ++j) {
            CHECK(m(i, j) == m(j, i));
            if (i == j)
                continue;
            if (topic_of(m.terms[i]) == topic_of(m.terms[j]))
                within_min = std::min(within_min, m(i, j));
            else
                across_max = std::max(across_max, m(i, j));
        }
    CHECK(within_min > across_max);

    rank.k = 2;
    const auto small = second_order(index, id(index, "pivot"), rank, opt);
    CHECK(small.terms.size() == 2);
    CHECK(small.values.size() == 4);
    CHECK(small(0, 1) == small(1, 0));
}

TEST_CASE("association timelines")
{
    // In slice s, x and y are adjacent in (s + 1) of every 5 charters.
    std::vector<DocSpec> docs;
    Rng rng(36);
    for (int slice = 0; slice < 4; ++slice)
        for (int d = 0; d < 40; ++d) {
            std::vector<std::string> filler;
            for (int k = 0; k < 20; ++k)
                filler.push_back(word(rng.below(30)));
            std::vector<std::string> doc;
            if (d % 5 <= slice) {
                doc = {"x", "y"};
                doc.insert(doc.end(), filler.begin(), filler.end());
            } else {
                doc = {"x"};
                doc.insert(doc.end(), filler.begin(), filler.end());
                doc.push_back("y");
            }
            docs.push_back({doc, 1000 + slice * 50 + d, {}, {}, {}, {}});
        }
    docs.push_back({{"lonely"}, 1210, {}, {}, {}, {}});
    const auto index = make_index(docs);
    const auto x = id(index, "x"), y = id(index, "y");
    const auto plan = slice_by_halfcentury(index, 1000, 1250);
    const auto series = association_timeline(index, x, y, plan, Measure::dice, 1);
    REQUIRE(series.size() == 5);
    for (int s = 0; s < 4; ++s)
        REQUIRE(series[s]);
    for (int s = 1; s < 4; ++s)
        CHECK(series[s]->value > series[s - 1]->value);
    CHECK_FALSE(series[4]);

    const auto absent = association_timeline(index, x, id(index, "lonely"), plan, Measure::dice, 1);
    for (int s = 0; s < 4; ++s)
        CHECK_FALSE(absent[s]);

    const auto whole = slice_equal_tokens(index, 1);
    const auto one = association_timeline(index, x, y, whole, Measure::dice, 3);
    PairTableOptions opt;
    opt.window = 3;
    REQUIRE(one.size() == 1);
    CHECK(one[0]->value == associate(pair_table(index, opt), x, y, Measure::dice).value);
}
