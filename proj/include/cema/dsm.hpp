#pragma once

#include <cema/contingency.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace cema {

/// Lemmas with corpus frequency >= min_freq, ascending id.
std::vector<LemmaId> select_targets(const Index& index, std::uint64_t min_freq);
/// The `top_n` most frequent lemmas (ties by lemma string), ascending id.
std::vector<LemmaId> select_contexts(const Index& index, std::size_t top_n);

/// Cell (t, c): context tokens c within +-window of an occurrence of t in the
/// same charter.
ContingencyTable term_context_matrix(const Index& index, std::span<const LemmaId> targets,
                                     std::span<const LemmaId> contexts, int window,
                                     const CharterFilter& filter = {});

/// max(0, log(p(t,c) / (p(t) p(c)))); zero cells stay zero. With alpha != 1
/// the context distribution is p(c)^alpha renormalized.
Eigen::MatrixXd ppmi(const ContingencyTable& counts, double alpha = 1.0);

struct VectorSpace {
    std::vector<std::string> terms;
    std::vector<std::string> contexts;
    Eigen::MatrixXd vectors;         // terms x d, U_d * Sigma_d
    Eigen::VectorXd singular_values; // d, non-increasing
    Eigen::MatrixXd context_vectors; // contexts x d, V_d

    Eigen::Index dim() const noexcept { return vectors.cols(); }
    std::ptrdiff_t find(const std::string& term) const;
};

/// Rank-d SVD with canonical singular-vector signs.
VectorSpace truncated_svd(const Eigen::MatrixXd& matrix, int d, std::vector<std::string> terms = {},
                          std::vector<std::string> contexts = {});

struct Neighbor {
    std::string term;
    double cosine = 0.0;
};

struct NeighborList {
    std::vector<Neighbor> neighbors;
    std::vector<std::string> zero_vectors; // candidates that cannot be ranked
};

/// Throws DataError for an unknown term or a zero pivot vector.
NeighborList cosine_neighbors(const VectorSpace& space, const std::string& term, std::size_t k);

struct FieldMember {
    std::string term;
    int group = 0;
    double x = 0.0; // dimension 1
    double y = 0.0; // dimension 2 (0 for a one-dimensional space)
    double cosine = 0.0;
};

struct SemanticField {
    std::string pivot;
    double pivot_x = 0.0;
    double pivot_y = 0.0;
    std::vector<FieldMember> members;
};

/// Top-k neighbours of `pivot` split into `groups` k-means clusters.
SemanticField semantic_field(const VectorSpace& space, const std::string& pivot, std::size_t k, int groups,
                             std::uint64_t seed);

/// Clusters the rows of a square association matrix (e.g. second-order
/// co-occurrence); coordinates come from its first two singular dimensions.
SemanticField semantic_field(const std::vector<std::string>& labels, const Eigen::MatrixXd& matrix, int groups,
                             std::uint64_t seed);

/// One line per term: the term, then its components, space-separated.
void write_vectors(std::ostream& out, const VectorSpace& space);
VectorSpace read_vectors(std::istream& in);

} // namespace cema
