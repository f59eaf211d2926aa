#include <cema/dsm.hpp>
#include <cema/error.hpp>
#include <cema/factor.hpp>
#include <cema/kernels.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace cema {

std::vector<LemmaId> select_targets(const Index& index, std::uint64_t min_freq)
{
    std::vector<LemmaId> out;
    for (LemmaId l = 0; l < index.lemmas().size(); ++l)
        if (index.frequency(l) >= min_freq && index.frequency(l) > 0)
            out.push_back(l);
    return out;
}

std::vector<LemmaId> select_contexts(const Index& index, std::size_t top_n)
{
    std::vector<LemmaId> all;
    for (LemmaId l = 0; l < index.lemmas().size(); ++l)
        if (index.frequency(l) > 0)
            all.push_back(l);
    // ids follow string order, so a stable sort on frequency breaks ties by string
    std::stable_sort(all.begin(), all.end(),
                     [&](LemmaId a, LemmaId b) { return index.frequency(a) > index.frequency(b); });
    if (all.size() > top_n)
        all.resize(top_n);
    std::sort(all.begin(), all.end());
    return all;
}

ContingencyTable term_context_matrix(const Index& index, std::span<const LemmaId> targets,
                                     std::span<const LemmaId> contexts, int window, const CharterFilter& filter)
{
    if (targets.empty() || contexts.empty())
        throw DataError("term-context matrix needs targets and contexts");
    if (window < 1)
        throw UsageError("window must be at least 1");
    const auto charters = select_charters(index, filter);
    auto cells = kernels::term_context_counts(index, charters, targets, contexts, window);
    std::vector<std::string> rows;
    std::vector<std::string> cols;
    for (auto t : targets)
        rows.push_back(index.lemmas()[t]);
    for (auto c : contexts)
        cols.push_back(index.lemmas()[c]);
    return ContingencyTable(std::move(rows), std::move(cols), std::move(cells));
}

Eigen::MatrixXd ppmi(const ContingencyTable& counts, double alpha)
{
    if (counts.total() == 0)
        throw DataError("PPMI of an empty table");
    if (!(alpha > 0.0))
        throw UsageError("context exponent must be positive");
    const auto nr = counts.rows();
    const auto nc = counts.cols();
    const double n = static_cast<double>(counts.total());

    std::vector<double> pc(nc);
    double norm = 0.0;
    for (std::size_t j = 0; j < nc; ++j) {
        pc[j] = std::pow(static_cast<double>(counts.col_totals()[j]), alpha);
        norm += pc[j];
    }
    for (auto& p : pc)
        p /= norm;

    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(nc));
    if (alpha == 1.0) {
        // f n / (r c) from exact integer products: independent cells give
        // exactly 0 and scaling every count leaves the quotient unchanged.
        using Wide = unsigned __int128;
        const Wide total = counts.total();
        for (std::size_t i = 0; i < nr; ++i) {
            const Wide r = counts.row_totals()[i];
            for (std::size_t j = 0; j < nc; ++j) {
                const auto f = counts(i, j);
                if (f == 0)
                    continue;
                const Wide num = Wide{f} * total;
                const Wide den = r * Wide{counts.col_totals()[j]};
                if (num <= den)
                    continue;
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    std::log(static_cast<double>(num) / static_cast<double>(den));
            }
        }
        return out;
    }
    for (std::size_t i = 0; i < nr; ++i) {
        const double pt = static_cast<double>(counts.row_totals()[i]) / n;
        for (std::size_t j = 0; j < nc; ++j) {
            const auto f = counts(i, j);
            if (f == 0)
                continue;
            const double v = std::log((static_cast<double>(f) / n) / (pt * pc[j]));
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::max(0.0, v);
        }
    }
    return out;
}

std::ptrdiff_t VectorSpace::find(const std::string& term) const
{
    auto it = std::find(terms.begin(), terms.end(), term);
    return it == terms.end() ? -1 : it - terms.begin();
}

VectorSpace truncated_svd(const Eigen::MatrixXd& matrix, int d, std::vector<std::string> terms,
                          std::vector<std::string> contexts)
{
    if (d <= 0)
        throw UsageError("SVD dimension must be positive");
    if (d > std::min(matrix.rows(), matrix.cols()))
        throw UsageError("SVD dimension exceeds min(rows, cols)");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::MatrixXd u = svd.matrixU().leftCols(d);
    Eigen::MatrixXd v = svd.matrixV().leftCols(d);
    canonicalize_signs(u, v);

    VectorSpace space;
    space.singular_values = svd.singularValues().head(d);
    space.vectors = u * space.singular_values.asDiagonal();
    space.context_vectors = std::move(v);
    if (terms.empty())
        for (Eigen::Index i = 0; i < matrix.rows(); ++i)
            terms.push_back(std::to_string(i));
    if (contexts.empty())
        for (Eigen::Index j = 0; j < matrix.cols(); ++j)
            contexts.push_back(std::to_string(j));
    space.terms = std::move(terms);
    space.contexts = std::move(contexts);
    return space;
}

NeighborList cosine_neighbors(const VectorSpace& space, const std::string& term, std::size_t k)
{
    const auto p = space.find(term);
    if (p < 0)
        throw DataError("term not in vector space: " + term);
    const Eigen::VectorXd pivot = space.vectors.row(p);
    const double pn = pivot.norm();
    if (pn == 0.0)
        throw DataError("zero vector for term: " + term);

    NeighborList out;
    for (Eigen::Index i = 0; i < space.vectors.rows(); ++i) {
        if (i == p)
            continue;
        const double n = space.vectors.row(i).norm();
        const auto& name = space.terms[static_cast<std::size_t>(i)];
        if (n == 0.0) {
            out.zero_vectors.push_back(name);
            continue;
        }
        const double cos = std::clamp(space.vectors.row(i).dot(pivot) / (n * pn), -1.0, 1.0);
        out.neighbors.push_back({name, cos});
    }
    std::sort(out.neighbors.begin(), out.neighbors.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.cosine != b.cosine)
            return a.cosine > b.cosine;
        return a.term < b.term;
    });
    if (out.neighbors.size() > k)
        out.neighbors.resize(k);
    return out;
}

SemanticField semantic_field(const VectorSpace& space, const std::string& pivot, std::size_t k, int groups,
                             std::uint64_t seed)
{
    if (groups <= 0)
        throw UsageError("group count must be positive");
    if (k < static_cast<std::size_t>(groups))
        throw UsageError("semantic field needs k >= groups");
    auto nb = cosine_neighbors(space, pivot, k);
    if (nb.neighbors.size() < static_cast<std::size_t>(groups))
        throw DataError("fewer neighbours than groups");

    Eigen::MatrixXd pts(static_cast<Eigen::Index>(nb.neighbors.size()), space.dim());
    for (std::size_t i = 0; i < nb.neighbors.size(); ++i)
        pts.row(static_cast<Eigen::Index>(i)) = space.vectors.row(space.find(nb.neighbors[i].term));
    const auto cl = kmeans(pts, groups, seed);

    SemanticField field;
    field.pivot = pivot;
    const auto p = space.find(pivot);
    field.pivot_x = space.vectors(p, 0);
    field.pivot_y = space.dim() > 1 ? space.vectors(p, 1) : 0.0;
    for (std::size_t i = 0; i < nb.neighbors.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        field.members.push_back({nb.neighbors[i].term, cl.assignments[i], pts(r, 0),
                                 space.dim() > 1 ? pts(r, 1) : 0.0, nb.neighbors[i].cosine});
    }
    return field;
}

SemanticField semantic_field(const std::vector<std::string>& labels, const Eigen::MatrixXd& matrix, int groups,
                             std::uint64_t seed)
{
    if (matrix.rows() != matrix.cols() || static_cast<std::size_t>(matrix.rows()) != labels.size())
        throw UsageError("semantic field: square matrix with one label per row required");
    if (groups <= 0 || static_cast<Eigen::Index>(groups) > matrix.rows())
        throw UsageError("semantic field needs 1 <= groups <= terms");
    const int d = static_cast<int>(std::min<Eigen::Index>(2, matrix.rows()));
    const auto space = truncated_svd(matrix, d, labels, labels);
    const auto cl = kmeans(matrix, groups, seed);
    SemanticField field;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        field.members.push_back({labels[i], cl.assignments[i], space.vectors(r, 0),
                                 d > 1 ? space.vectors(r, 1) : 0.0, 0.0});
    }
    return field;
}

void write_vectors(std::ostream& out, const VectorSpace& space)
{
    std::string line;
    for (std::size_t i = 0; i < space.terms.size(); ++i) {
        line = space.terms[i];
        for (Eigen::Index k = 0; k < space.dim(); ++k)
            fmt::format_to(std::back_inserter(line), " {}", space.vectors(static_cast<Eigen::Index>(i), k));
        line.push_back('\n');
        out << line;
    }
}

VectorSpace read_vectors(std::istream& in)
{
    VectorSpace space;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::istringstream ss(line);
        std::string term;
        ss >> term;
        std::vector<double> v;
        double x;
        while (ss >> x)
            v.push_back(x);
        if (!ss.eof())
            throw DataError("vector file line " + std::to_string(lineno) + ": bad component");
        if (!rows.empty() && v.size() != rows.front().size())
            throw DataError("vector file line " + std::to_string(lineno) + ": dimension mismatch");
        space.terms.push_back(std::move(term));
        rows.push_back(std::move(v));
    }
    if (rows.empty() || rows.front().empty())
        throw DataError("empty vector file");
    const auto d = static_cast<Eigen::Index>(rows.front().size());
    space.vectors.resize(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (Eigen::Index k = 0; k < d; ++k)
            space.vectors(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
    space.singular_values = space.vectors.colwise().norm().transpose();
    return space;
}

} // namespace cema
