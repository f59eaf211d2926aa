#pragma once

#include <cema/contingency.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cema {

/// Correspondence analysis in principal coordinates for rows and columns.
struct CAResult {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    Eigen::MatrixXd row_coords;      // rows x d
    Eigen::MatrixXd col_coords;      // cols x d
    Eigen::VectorXd singular_values; // all min(rows, cols) - 1 axes
    Eigen::VectorXd axis_inertia;    // sigma^2 per axis
    Eigen::VectorXd axis_share;      // axis_inertia / total, sums to 1
    double total_inertia = 0.0;      // chi^2 / n
    Eigen::VectorXd row_masses;
    Eigen::VectorXd col_masses;
    Eigen::MatrixXd row_contrib;     // rows x d, each column sums to 1
    Eigen::MatrixXd col_contrib;
    std::vector<std::string> dropped_rows;
    std::vector<std::string> dropped_cols;

    Eigen::Index dim() const noexcept { return row_coords.cols(); }
};

/// All-zero rows/columns are dropped and reported; fewer than two rows or
/// columns left is a DataError. `d` is clamped to min(rows, cols) - 1.
CAResult correspondence_analysis(const ContingencyTable& table, int d);

/// Flips singular vector pairs so the largest-magnitude entry (first on
/// ties) of each column of `u` is positive.
void canonicalize_signs(Eigen::MatrixXd& u, Eigen::MatrixXd& v);

enum class ClusterMethod { kmeans, ward };

/// One agglomeration step. Leaves are 0..n-1; merge i creates cluster n+i.
struct Merge {
    std::size_t left = 0;
    std::size_t right = 0;
    double height = 0.0; // increase of the within-cluster sum of squares
    std::size_t size = 0;
};

struct Clustering {
    ClusterMethod method = ClusterMethod::kmeans;
    int k = 0;
    std::vector<int> assignments;
    Eigen::MatrixXd centers;               // kmeans only
    std::vector<double> objective_history; // kmeans: SSE after each assignment step
    int iterations = 0;
    std::vector<Merge> merges;             // ward only, heights non-decreasing
};

/// Rows of `points` are observations. Farthest-point seeding from a seeded
/// random first center, then Lloyd iterations until the assignment is
/// stable or `max_iter` is reached.
Clustering kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int max_iter = 100);

/// Ward agglomeration (nearest-neighbour chain with Lance-Williams updates).
/// When k > 0 the dendrogram is also cut into k clusters.
Clustering ward_cluster(const Eigen::MatrixXd& points, int k = 0);

/// Labels 0..k-1 after applying the first n-k merges; clusters are numbered
/// by their smallest member.
std::vector<int> cut_dendrogram(std::span<const Merge> merges, std::size_t n, int k);

/// Mean silhouette width of a labelled point set (Euclidean).
double mean_silhouette(const Eigen::MatrixXd& points, std::span<const int> labels);

} // namespace cema
