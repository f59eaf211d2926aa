#include <cema/error.hpp>
#include <cema/factor.hpp>
#include <cema/random.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cema {

void canonicalize_signs(Eigen::MatrixXd& u, Eigen::MatrixXd& v)
{
    for (Eigen::Index k = 0; k < u.cols(); ++k) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < u.rows(); ++i) {
            const double a = std::abs(u(i, k));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (u.rows() > 0 && u(arg, k) < 0.0) {
            u.col(k) *= -1.0;
            if (k < v.cols())
                v.col(k) *= -1.0;
        }
    }
}

CAResult correspondence_analysis(const ContingencyTable& input, int d)
{
    if (d <= 0)
        throw UsageError("CA dimension must be positive");
    CAResult res;
    const auto table = input.drop_empty(&res.dropped_rows, &res.dropped_cols);
    if (table.rows() < 2 || table.cols() < 2)
        throw DataError("correspondence analysis needs at least two non-empty rows and columns");

    const auto nr = static_cast<Eigen::Index>(table.rows());
    const auto nc = static_cast<Eigen::Index>(table.cols());
    const double n = static_cast<double>(table.total());

    res.row_labels.assign(table.row_labels().begin(), table.row_labels().end());
    res.col_labels.assign(table.col_labels().begin(), table.col_labels().end());
    res.row_masses.resize(nr);
    res.col_masses.resize(nc);
    for (Eigen::Index i = 0; i < nr; ++i)
        res.row_masses(i) = static_cast<double>(table.row_totals()[static_cast<std::size_t>(i)]) / n;
    for (Eigen::Index j = 0; j < nc; ++j)
        res.col_masses(j) = static_cast<double>(table.col_totals()[static_cast<std::size_t>(j)]) / n;

    Eigen::MatrixXd s(nr, nc);
    for (Eigen::Index i = 0; i < nr; ++i)
        for (Eigen::Index j = 0; j < nc; ++j) {
            const double p = static_cast<double>(table(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) / n;
            const double e = res.row_masses(i) * res.col_masses(j);
            s(i, j) = (p - e) / std::sqrt(e);
        }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::Index axes = std::min(nr, nc) - 1;
    const Eigen::Index dim = std::min<Eigen::Index>(d, axes);
    Eigen::MatrixXd u = svd.matrixU().leftCols(axes);
    Eigen::MatrixXd v = svd.matrixV().leftCols(axes);
    canonicalize_signs(u, v);

    res.singular_values = svd.singularValues().head(axes);
    res.axis_inertia = res.singular_values.array().square();
    res.total_inertia = res.axis_inertia.sum();
    res.axis_share = res.total_inertia > 0.0 ? Eigen::VectorXd(res.axis_inertia / res.total_inertia)
                                             : Eigen::VectorXd::Zero(axes);

    const Eigen::VectorXd sig = res.singular_values.head(dim);
    res.row_coords = res.row_masses.array().rsqrt().matrix().asDiagonal() * u.leftCols(dim) * sig.asDiagonal();
    res.col_coords = res.col_masses.array().rsqrt().matrix().asDiagonal() * v.leftCols(dim) * sig.asDiagonal();

    auto contributions = [&](const Eigen::MatrixXd& coords, const Eigen::VectorXd& masses) {
        Eigen::MatrixXd ctr = Eigen::MatrixXd::Zero(coords.rows(), dim);
        for (Eigen::Index k = 0; k < dim; ++k) {
            const double inertia = sig(k) * sig(k);
            if (inertia <= 0.0)
                continue;
            for (Eigen::Index i = 0; i < coords.rows(); ++i)
                ctr(i, k) = masses(i) * coords(i, k) * coords(i, k) / inertia;
        }
        return ctr;
    };
    res.row_contrib = contributions(res.row_coords, res.row_masses);
    res.col_contrib = contributions(res.col_coords, res.col_masses);
    return res;
}

// ---------------------------------------------------------------------------

namespace {

double sq_dist(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b, Eigen::Index j)
{
    return (a.row(i) - b.row(j)).squaredNorm();
}

} // namespace

Clustering kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int max_iter)
{
    const auto n = points.rows();
    if (k <= 0)
        throw UsageError("k must be positive");
    if (k > n)
        throw UsageError("k exceeds the number of points");
    if (max_iter < 1)
        throw UsageError("max_iter must be positive");

    Clustering cl;
    cl.method = ClusterMethod::kmeans;
    cl.k = k;
    cl.centers.resize(k, points.cols());

    Rng rng(seed);
    Eigen::Index first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    cl.centers.row(0) = points.row(first);
    std::vector<double> nearest(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        nearest[static_cast<std::size_t>(i)] = sq_dist(points, i, cl.centers, 0);
    for (int c = 1; c < k; ++c) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (nearest[static_cast<std::size_t>(i)] > best) {
                best = nearest[static_cast<std::size_t>(i)];
                arg = i;
            }
        cl.centers.row(c) = points.row(arg);
        for (Eigen::Index i = 0; i < n; ++i)
            nearest[static_cast<std::size_t>(i)] =
                std::min(nearest[static_cast<std::size_t>(i)], sq_dist(points, i, cl.centers, c));
    }

    cl.assignments.assign(static_cast<std::size_t>(n), -1);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        double sse = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            int arg = 0;
            double best = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double dd = sq_dist(points, i, cl.centers, c);
                if (dd < best) {
                    best = dd;
                    arg = c;
                }
            }
            sse += best;
            if (cl.assignments[static_cast<std::size_t>(i)] != arg) {
                cl.assignments[static_cast<std::size_t>(i)] = arg;
                changed = true;
            }
        }
        cl.objective_history.push_back(sse);
        cl.iterations = iter + 1;
        if (!changed)
            break;

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
        std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto a = cl.assignments[static_cast<std::size_t>(i)];
            sums.row(a) += points.row(i);
            ++counts[static_cast<std::size_t>(a)];
        }
        for (int c = 0; c < k; ++c)
            if (counts[static_cast<std::size_t>(c)] > 0)
                cl.centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
    return cl;
}

std::vector<int> cut_dendrogram(std::span<const Merge> merges, std::size_t n, int k)
{
    if (k <= 0 || static_cast<std::size_t>(k) > n)
        throw UsageError("cut size must be in [1, n]");
    std::vector<std::size_t> parent(2 * n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    };
    const std::size_t steps = n - static_cast<std::size_t>(k);
    for (std::size_t m = 0; m < steps && m < merges.size(); ++m) {
        parent[find(merges[m].left)] = n + m;
        parent[find(merges[m].right)] = n + m;
    }
    std::vector<int> labels(n, -1);
    std::vector<std::pair<std::size_t, int>> root_label;
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = find(i);
        auto it = std::find_if(root_label.begin(), root_label.end(), [r](const auto& p) { return p.first == r; });
        if (it == root_label.end()) {
            root_label.emplace_back(r, next);
            labels[i] = next++;
        } else {
            labels[i] = it->second;
        }
    }
    return labels;
}

Clustering ward_cluster(const Eigen::MatrixXd& points, int k)
{
    const auto n = static_cast<std::size_t>(points.rows());
    if (n < 2)
        throw DataError("ward clustering needs at least two points");

    // Half squared distances: Lance-Williams then yields the SSE increase.
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (points.row(static_cast<Eigen::Index>(i)) -
                                    points.row(static_cast<Eigen::Index>(j))).squaredNorm();
            dist[i * n + j] = v;
            dist[j * n + i] = v;
        }
    auto D = [&](std::size_t a, std::size_t b) -> double& { return dist[a * n + b]; };

    std::vector<std::size_t> size(n, 1);
    std::vector<char> active(n, 1);
    std::vector<std::size_t> chain;
    struct Raw {
        std::size_t a, b;
        double h;
    };
    std::vector<Raw> raw;
    raw.reserve(n - 1);

    while (raw.size() < n - 1) {
        if (chain.empty()) {
            for (std::size_t i = 0; i < n; ++i)
                if (active[i]) {
                    chain.push_back(i);
                    break;
                }
        }
        std::size_t x = 0;
        std::size_t y = 0;
        double current = 0.0;
        while (true) {
            x = chain.back();
            bool have = chain.size() > 1;
            y = have ? chain[chain.size() - 2] : 0;
            current = have ? D(x, y) : std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                if (!active[i] || i == x)
                    continue;
                if (D(x, i) < current) {
                    current = D(x, i);
                    y = i;
                }
            }
            if (chain.size() > 1 && y == chain[chain.size() - 2])
                break;
            chain.push_back(y);
        }
        chain.pop_back();
        chain.pop_back();

        raw.push_back({std::min(x, y), std::max(x, y), current});
        const auto nx = static_cast<double>(size[x]);
        const auto ny = static_cast<double>(size[y]);
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i] || i == x || i == y)
                continue;
            const auto ni = static_cast<double>(size[i]);
            const double v = ((ni + nx) * D(i, x) + (ni + ny) * D(i, y) - ni * current) / (ni + nx + ny);
            D(i, y) = v;
            D(y, i) = v;
        }
        active[x] = 0;
        size[y] += size[x];
    }

    // Order by height, then relabel slots to dendrogram ids.
    std::vector<std::size_t> order(raw.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return raw[a].h < raw[b].h; });

    std::vector<std::size_t> parent(2 * n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    std::vector<std::size_t> csize(2 * n, 1);
    auto find = [&](std::size_t v) {
        while (parent[v] != v)
            v = parent[v] = parent[parent[v]];
        return v;
    };
    Clustering cl;
    cl.method = ClusterMethod::ward;
    for (std::size_t m = 0; m < order.size(); ++m) {
        const auto& r = raw[order[m]];
        auto a = find(r.a);
        auto b = find(r.b);
        if (a > b)
            std::swap(a, b);
        const auto id = n + m;
        parent[a] = id;
        parent[b] = id;
        csize[id] = csize[a] + csize[b];
        cl.merges.push_back({a, b, r.h, csize[id]});
    }
    if (k > 0) {
        cl.k = k;
        cl.assignments = cut_dendrogram(cl.merges, n, k);
    }
    return cl;
}

double mean_silhouette(const Eigen::MatrixXd& points, std::span<const int> labels)
{
    const auto n = static_cast<std::size_t>(points.rows());
    if (labels.size() != n)
        throw UsageError("silhouette: one label per point required");
    if (n == 0)
        return 0.0;
    const int groups = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::size_t> group_size(static_cast<std::size_t>(groups), 0);
    for (auto l : labels)
        ++group_size[static_cast<std::size_t>(l)];

    double total = 0.0;
    std::vector<double> sum(static_cast<std::size_t>(groups));
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(sum.begin(), sum.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i)
                sum[static_cast<std::size_t>(labels[j])] +=
                    (points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).norm();
        const auto own = static_cast<std::size_t>(labels[i]);
        if (group_size[own] < 2)
            continue;
        const double a = sum[own] / static_cast<double>(group_size[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < sum.size(); ++g)
            if (g != own && group_size[g] > 0)
                b = std::min(b, sum[g] / static_cast<double>(group_size[g]));
        if (!std::isfinite(b))
            continue;
        const double m = std::max(a, b);
        total += m > 0.0 ? (b - a) / m : 0.0;
    }
    return total / static_cast<double>(n);
}

} // namespace cema
