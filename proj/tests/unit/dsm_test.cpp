#include <cema/dsm.hpp>
#include <cema/error.hpp>
#include <cema/random.hpp>

#include <oracles/oracles.hpp>
#include <support/fixtures.hpp>

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace cema;
using namespace cema::test;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c)
{
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j)
            m(i, j) = rng.uniform() * 2 - 1;
    return m;
}

VectorSpace space_of(std::vector<std::string> terms, const Eigen::MatrixXd& vectors)
{
    VectorSpace s;
    s.terms = std::move(terms);
    s.vectors = vectors;
    s.singular_values = Eigen::VectorXd::Ones(vectors.cols());
    return s;
}

std::vector<LemmaId> all_lemmas(const Index& index)
{
    std::vector<LemmaId> ids(index.lemmas().size());
    std::iota(ids.begin(), ids.end(), 0);
    return ids;
}

} // namespace

TEST_CASE("term-context counting")
{
    const auto index = make_index(std::vector<std::vector<std::string>>{{"a", "b"}, {"c"}});
    const std::vector<LemmaId> a = {*index.lemmas().find("a")};
    const std::vector<LemmaId> b = {*index.lemmas().find("b")};
    const auto t = term_context_matrix(index, a, b, 1);
    CHECK(t(0, 0) == 1);

    const auto split = make_index(std::vector<std::vector<std::string>>{{"a"}, {"b"}});
    const std::vector<LemmaId> sa = {*split.lemmas().find("a")};
    const std::vector<LemmaId> sb = {*split.lemmas().find("b")};
    CHECK(term_context_matrix(split, sa, sb, 10).total() == 0);
    CHECK_THROWS_AS(term_context_matrix(split, {}, sb, 1), DataError);
    CHECK_THROWS_AS(term_context_matrix(split, sa, sb, 0), UsageError);
}

TEST_CASE("term-context counts agree with a window scan")
{
    Rng rng(51);
    for (int trial = 0; trial < 10; ++trial) {
        const auto index = make_index(random_docs(rng, 15, 40, 25));
        const int w = 1 + static_cast<int>(rng.below(6));
        const auto ids = all_lemmas(index);
        const auto t = term_context_matrix(index, ids, ids, w);
        const auto expected = oracle::window_scan(lemma_docs(index), w);
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (std::size_t j = 0; j < ids.size(); ++j) {
                const auto it = expected.find({index.lemmas()[ids[i]], index.lemmas()[ids[j]]});
                CHECK(t(i, j) == (it == expected.end() ? 0 : it->second));
            }
    }
}

TEST_CASE("PPMI of small tables")
{
    const ContingencyTable diag({"a", "b"}, {"x", "y"}, {2, 0, 0, 2});
    const auto m = ppmi(diag);
    CHECK(m(0, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(m(1, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(m(0, 1) == 0.0);
    CHECK(m(1, 0) == 0.0);

    // Outer product of marginals: independence everywhere.
    const ContingencyTable indep({"a", "b", "c"}, {"x", "y"}, {1, 2, 2, 4, 3, 6});
    CHECK(ppmi(indep).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(ppmi(ContingencyTable({"a"}, {"x"}, {0})), DataError);
}

TEST_CASE("PPMI is non-negative and invariant under count scaling")
{
    Rng rng(52);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t r = 2 + rng.below(8), c = 2 + rng.below(8);
        std::vector<std::uint64_t> cells(r * c), scaled(r * c);
        const auto factor = 2 + rng.below(9);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            cells[i] = rng.below(3) ? rng.below(20) : 0;
            scaled[i] = cells[i] * factor;
        }
        cells[0] += 1;
        scaled[0] += factor;
        std::vector<std::string> rows(r), cols(c);
        const auto a = ppmi(ContingencyTable(rows, cols, cells));
        const auto b = ppmi(ContingencyTable(rows, cols, scaled));
        CHECK(a.minCoeff() >= 0.0);
        CHECK(a == b);
    }
}

TEST_CASE("PPMI with smoothed context probabilities")
{
    const std::vector<std::uint64_t> cells{4, 1, 0, 2, 3, 5};
    const ContingencyTable t({"a", "b"}, {"x", "y", "z"}, cells);
    const double alpha = 0.75;
    const double n = 15.0;
    const double row[2] = {5.0, 10.0};
    const double col[3] = {6.0, 4.0, 5.0};
    double norm = 0.0;
    for (double c : col)
        norm += std::pow(c, alpha);
    const auto m = ppmi(t, alpha);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) {
            const double f = static_cast<double>(cells[static_cast<std::size_t>(i * 3 + j)]);
            const double expected =
                f == 0.0 ? 0.0 : std::max(0.0, std::log((f / n) / ((row[i] / n) * std::pow(col[j], alpha) / norm)));
            CHECK(m(i, j) == doctest::Approx(expected).epsilon(1e-12));
        }
    CHECK_THROWS_AS(ppmi(t, 0.0), UsageError);
}

TEST_CASE("SVD of a diagonal matrix")
{
    Eigen::MatrixXd m(2, 2);
    m << 3, 0, 0, 1;
    const auto s = truncated_svd(m, 1);
    CHECK(s.singular_values(0) == doctest::Approx(3.0));
    CHECK(std::abs(s.vectors(0, 0)) == doctest::Approx(3.0));
    CHECK(std::abs(s.vectors(1, 0)) < 1e-12);
    CHECK(s.vectors(0, 0) > 0);
    CHECK_THROWS_AS(truncated_svd(m, 0), UsageError);
    CHECK_THROWS_AS(truncated_svd(m, 3), UsageError);
}

TEST_CASE("full-rank SVD reconstructs the matrix")
{
    Rng rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        const auto r = 2 + static_cast<Eigen::Index>(rng.below(12));
        const auto c = 2 + static_cast<Eigen::Index>(rng.below(12));
        const auto m = random_matrix(rng, r, c);
        const int d = static_cast<int>(std::min(r, c));
        const auto s = truncated_svd(m, d);
        const Eigen::MatrixXd back = s.vectors * s.context_vectors.transpose();
        CHECK((back - m).norm() / m.norm() <= 1e-8);
        for (Eigen::Index k = 1; k < s.singular_values.size(); ++k)
            CHECK(s.singular_values(k) <= s.singular_values(k - 1));
        double previous = INFINITY;
        for (int k = 1; k <= d; ++k) {
            const auto t = truncated_svd(m, k);
            const double err = (t.vectors * t.context_vectors.transpose() - m).norm();
            CHECK(err <= previous + 1e-12);
            previous = err;
        }
    }
}

TEST_CASE("cosine of identical and orthogonal vectors")
{
    Eigen::MatrixXd v(4, 2);
    v << 1, 0, 2, 0, 0, 3, 0, 0;
    const auto nb = cosine_neighbors(space_of({"p", "same", "ortho", "zero"}, v), "p", 10);
    REQUIRE(nb.neighbors.size() == 2);
    CHECK(nb.neighbors[0].term == "same");
    CHECK(nb.neighbors[0].cosine == doctest::Approx(1.0));
    CHECK(nb.neighbors[1].cosine == doctest::Approx(0.0));
    CHECK(nb.zero_vectors == std::vector<std::string>{"zero"});
    CHECK_THROWS_AS(cosine_neighbors(space_of({"p", "same", "ortho", "zero"}, v), "zero", 1), DataError);
    CHECK_THROWS_AS(cosine_neighbors(space_of({"p", "same", "ortho", "zero"}, v), "absent", 1), DataError);
}

TEST_CASE("cosine ranks survive uniform scaling")
{
    Rng rng(54);
    const auto m = random_matrix(rng, 30, 5);
    std::vector<std::string> terms;
    for (int i = 0; i < 30; ++i)
        terms.push_back(word(static_cast<std::size_t>(i)));
    const auto a = cosine_neighbors(space_of(terms, m), terms[0], 29);
    const auto b = cosine_neighbors(space_of(terms, m * 7.5), terms[0], 29);
    REQUIRE(a.neighbors.size() == b.neighbors.size());
    for (std::size_t i = 0; i < a.neighbors.size(); ++i)
        CHECK(a.neighbors[i].term == b.neighbors[i].term);
}

TEST_CASE("lemmas with identical contexts are mutual nearest neighbours")
{
    std::vector<std::vector<std::string>> docs;
    Rng rng(55);
    for (int d = 0; d < 150; ++d) {
        std::vector<std::string> doc;
        for (int k = 0; k < 25; ++k)
            doc.push_back(word(rng.below(40)));
        const auto at = static_cast<std::ptrdiff_t>(rng.below(doc.size()));
        auto twin = doc;
        doc.insert(doc.begin() + at, "alpha");
        twin.insert(twin.begin() + at, "beta");
        docs.push_back(doc);
        docs.push_back(twin);
    }
    const auto index = make_index(docs);
    const auto targets = select_targets(index, 20);
    const auto contexts = select_contexts(index, 40);
    const auto counts = term_context_matrix(index, targets, contexts, 3);
    const auto space = truncated_svd(ppmi(counts), 10, {counts.row_labels().begin(), counts.row_labels().end()},
                                     {counts.col_labels().begin(), counts.col_labels().end()});
    CHECK(cosine_neighbors(space, "alpha", 1).neighbors[0].term == "beta");
    CHECK(cosine_neighbors(space, "beta", 1).neighbors[0].term == "alpha");
}

TEST_CASE("target and context selection")
{
    const auto index = make_index(std::vector<std::vector<std::string>>{{"a", "a", "a", "b", "b", "c"}});
    const auto targets = select_targets(index, 2);
    REQUIRE(targets.size() == 2);
    CHECK(index.lemmas()[targets[0]] == "a");
    CHECK(index.lemmas()[targets[1]] == "b");
    const auto contexts = select_contexts(index, 1);
    REQUIRE(contexts.size() == 1);
    CHECK(index.lemmas()[contexts[0]] == "a");
}

TEST_CASE("semantic fields")
{
    // Pivot between two tight groups of neighbours.
    Eigen::MatrixXd v(9, 3);
    v << 1, 1, 0.1,
         1, 0.1, 0, 1, 0.15, 0.05, 0.95, 0.1, 0.02, 1.05, 0.12, 0,
         0.1, 1, 0, 0.12, 1, 0.05, 0.05, 0.97, 0.01, 0.1, 1.02, 0;
    const std::vector<std::string> terms = {"pivot", "a1", "a2", "a3", "a4", "b1", "b2", "b3", "b4"};
    const auto space = space_of(terms, v);

    const auto one = semantic_field(space, "pivot", 8, 1, 3);
    REQUIRE(one.members.size() == 8);
    for (const auto& m : one.members)
        CHECK(m.group == 0);

    const auto two = semantic_field(space, "pivot", 8, 2, 3);
    std::vector<int> planted, found;
    for (const auto& m : two.members) {
        planted.push_back(m.term[0] == 'a' ? 0 : 1);
        found.push_back(m.group);
        const auto row = space.find(m.term);
        CHECK(m.x == v(row, 0));
        CHECK(m.y == v(row, 1));
    }
    CHECK(oracle::same_partition(planted, found));
    CHECK(two.pivot_x == 1.0);
    CHECK_THROWS_AS(semantic_field(space, "pivot", 1, 2, 3), UsageError);
}

TEST_CASE("semantic field of an association matrix")
{
    Eigen::MatrixXd m(4, 4);
    m << 1, 0.9, 0.1, 0, 0.9, 1, 0, 0.1, 0.1, 0, 1, 0.8, 0, 0.1, 0.8, 1;
    const auto field = semantic_field({"a", "b", "c", "d"}, m, 2, 1);
    REQUIRE(field.members.size() == 4);
    CHECK(oracle::same_partition({field.members[0].group, field.members[1].group, field.members[2].group,
                                  field.members[3].group},
                                 {0, 0, 1, 1}));
}

TEST_CASE("vector files round-trip")
{
    Rng rng(56);
    auto space = space_of({"a", "b", "c"}, random_matrix(rng, 3, 4));
    std::stringstream buf;
    write_vectors(buf, space);
    const auto back = read_vectors(buf);
    CHECK(back.terms == space.terms);
    CHECK(back.vectors == space.vectors);
    std::istringstream bad("a 1 2\nb 1\n");
    CHECK_THROWS_AS(read_vectors(bad), DataError);
}
