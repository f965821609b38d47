#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "neocc/core.hpp"
#include "neocc/objective.hpp"
#include "neocc/parallel.hpp"
#include "neocc/random.hpp"

// The alternating solver: point-to-cluster distance tables for both
// objectives, the two-phase greedy assignment, one-way initialization,
// parameter estimation, and the main co-clustering loop.

namespace neocc {

enum class Side { Row, Col };

/// Nonnegative point-to-cluster distances driving greedy assignment.
/// Row side: n x k. Column side: m x l.
struct DistanceTable {
    Matrixd values;
    Side side = Side::Row;
};

struct CoClusterResult {
    AssignmentMatrix U;
    AssignmentMatrix V;
    std::vector<double> trace;  ///< objective after init, then after each iteration
    int iterations = 0;
    bool converged = false;
    std::vector<Index> row_outliers;
    std::vector<Index> col_outliers;
    NeoParams params_used;
};

namespace detail {

// d_pq = sum_j sum_{t in C_j} (x_pt - mean(q,j))^2, assembled from
// per-point column-cluster sums and block means. O(nnz*l + n*k*l) instead
// of the O(n*k*l*m) definitional evaluation.
template <typename XT>
Matrixd row_distances_m_kernel(const XT& x, const AssignmentMatrix& u,
                               const AssignmentMatrix& v) {
    using S = typename XT::Scalar;
    const auto st = block_stats(x, u, v);
    const Matrix<S> vd = v.indicator<S>();
    const Matrix<S> rowsum = x * vd;            // n x l
    const Matrix<S> sqsum = squared(x) * vd;    // n x l
    const Index n = x.rows(), k = u.clusters(), l = v.clusters();

    Vector<S> point_sq = sqsum.rowwise().sum();
    Vector<S> cluster_off(k);
    for (Index q = 0; q < k; ++q) {
        S acc = 0;
        for (Index j = 0; j < l; ++j)
            acc += static_cast<S>(st.col_sizes(j)) * st.means(q, j) * st.means(q, j);
        cluster_off(q) = acc;
    }

    Matrixd d(n, k);
    parallel_for(0, n, [&](Index p) {
        for (Index q = 0; q < k; ++q) {
            S val = point_sq(p) + cluster_off(q);
            for (Index j = 0; j < l; ++j) val -= S(2) * st.means(q, j) * rowsum(p, j);
            d(p, q) = std::max(static_cast<double>(val), 0.0);
        }
    });
    return d;
}

// RCM distance, expanded from
//   d_pq = sum_j || (x_p - Q(p,j)) - (P(q,.) - mean(q,j)) ||^2 over C_j
// into per-point, per-cluster and cross terms; the cross term reduces to
// two matrix products via the column membership degrees.
template <typename XT>
Matrixd row_distances_rcm_kernel(const XT& x, const AssignmentMatrix& u,
                                 const AssignmentMatrix& v) {
    using S = typename XT::Scalar;
    const auto st = block_stats(x, u, v);
    const Matrix<S> p_means = row_cluster_means(x, u);  // k x m
    const Matrix<S> q_means = col_cluster_means(x, v);  // n x l
    const Matrix<S> vd = v.indicator<S>();
    const Matrix<S> sqsum = squared(x) * vd;  // n x l
    const Index n = x.rows(), k = u.clusters(), l = v.clusters();

    Vector<S> msize(l);
    for (Index j = 0; j < l; ++j) msize(j) = static_cast<S>(v.cluster_size(j));

    Vector<S> point_term(n);
    for (Index p = 0; p < n; ++p) {
        S acc = 0;
        for (Index j = 0; j < l; ++j)
            acc += sqsum(p, j) - msize(j) * q_means(p, j) * q_means(p, j);
        point_term(p) = acc;
    }
    const Matrix<S> ppv = p_means.array().square().matrix() * vd;  // k x l
    Vector<S> cluster_term(k);
    for (Index q = 0; q < k; ++q) {
        S acc = 0;
        for (Index j = 0; j < l; ++j)
            acc += ppv(q, j) - msize(j) * st.means(q, j) * st.means(q, j);
        cluster_term(q) = acc;
    }

    const Vector<S> degree = vd.rowwise().sum();  // m: cluster count per column
    const Matrix<S> cross = x * (degree.asDiagonal() * p_means.transpose());  // n x k
    const Matrix<S> cross_mean = q_means * (msize.asDiagonal() * st.means.transpose());  // n x k

    Matrixd d(n, k);
    parallel_for(0, n, [&](Index p) {
        for (Index q = 0; q < k; ++q) {
            const S val = point_term(p) + cluster_term(q) -
                          S(2) * (cross(p, q) - cross_mean(p, q));
            d(p, q) = std::max(static_cast<double>(val), 0.0);
        }
    });
    return d;
}

/// Squared Euclidean point-to-centroid distances (the one-way k-means
/// specialization); an empty cluster's centroid is the zero vector.
template <typename XT>
Matrixd kmeans_distances_kernel(const XT& x, const AssignmentMatrix& u) {
    using S = typename XT::Scalar;
    if (u.points() != x.rows())
        throw DimensionMismatch("assignment does not match matrix rows");
    const Matrix<S> c = row_cluster_means(x, u);      // k x m centroids
    const Matrix<S> g = x * c.transpose();            // n x k
    const Vector<S> rowsq = squared(x) * Vector<S>::Ones(x.cols());
    const Vector<S> csq = c.rowwise().squaredNorm();
    Matrixd d(x.rows(), u.clusters());
    parallel_for(0, x.rows(), [&](Index p) {
        for (Index q = 0; q < u.clusters(); ++q)
            d(p, q) = std::max(static_cast<double>(rowsq(p) - S(2) * g(p, q) + csq(q)), 0.0);
    });
    return d;
}

/// One-way NEO-K-Means objective, sum_q sum_{p in C_q} ||x_p - c_q||^2.
template <typename XT>
double oneway_objective(const XT& x, const AssignmentMatrix& u) {
    using S = typename XT::Scalar;
    const Matrix<S> c = row_cluster_means(x, u);
    const Vector<S> rowsq = squared(x) * Vector<S>::Ones(x.cols());
    const Matrix<S> ud = u.indicator<S>();
    double total = static_cast<double>((ud.transpose() * rowsq).sum());
    for (Index q = 0; q < u.clusters(); ++q)
        total -= static_cast<double>(u.cluster_size(q)) *
                 static_cast<double>(c.row(q).squaredNorm());
    return std::max(total, 0.0);
}

template <typename XT>
Vectord dense_row(const XT& x, Index r) {
    Vectord out = Vectord::Zero(x.cols());
    for (Index j = 0; j < x.cols(); ++j) out(j) = static_cast<double>(x.coeff(r, j));
    return out;
}

inline Vectord dense_row(const SparseMatrixd& x, Index r) {
    Vectord out = Vectord::Zero(x.cols());
    for (SparseMatrixd::InnerIterator it(x, r); it; ++it) out(it.col()) = it.value();
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Distance tables for both objectives, row and column sides

template <typename Derived>
DistanceTable row_distances_m(const Eigen::MatrixBase<Derived>& x, const AssignmentMatrix& u,
                              const AssignmentMatrix& v) {
    return {detail::row_distances_m_kernel(x.derived(), u, v), Side::Row};
}
template <typename Derived>
DistanceTable row_distances_m(const Eigen::SparseMatrixBase<Derived>& x, const AssignmentMatrix& u,
                              const AssignmentMatrix& v) {
    return {detail::row_distances_m_kernel(x.derived(), u, v), Side::Row};
}
inline DistanceTable row_distances_m(const DataMatrix& x, const AssignmentMatrix& u,
                                     const AssignmentMatrix& v) {
    return x.visit([&](const auto& m) { return row_distances_m(m, u, v); });
}

template <typename Derived>
DistanceTable row_distances_rcm(const Eigen::MatrixBase<Derived>& x, const AssignmentMatrix& u,
                                const AssignmentMatrix& v) {
    return {detail::row_distances_rcm_kernel(x.derived(), u, v), Side::Row};
}
template <typename Derived>
DistanceTable row_distances_rcm(const Eigen::SparseMatrixBase<Derived>& x,
                                const AssignmentMatrix& u, const AssignmentMatrix& v) {
    return {detail::row_distances_rcm_kernel(x.derived(), u, v), Side::Row};
}
inline DistanceTable row_distances_rcm(const DataMatrix& x, const AssignmentMatrix& u,
                                       const AssignmentMatrix& v) {
    return x.visit([&](const auto& m) { return row_distances_rcm(m, u, v); });
}

inline DistanceTable row_distances(const DataMatrix& x, const AssignmentMatrix& u,
                                   const AssignmentMatrix& v, Objective which) {
    return which == Objective::M ? row_distances_m(x, u, v) : row_distances_rcm(x, u, v);
}

/// Column-side distances are the row-side computation on the transpose.
inline DistanceTable col_distances_m(const DataMatrix& x, const AssignmentMatrix& u,
                                     const AssignmentMatrix& v) {
    DataMatrix xt = x.transposed();
    return {row_distances_m(xt, v, u).values, Side::Col};
}
inline DistanceTable col_distances_rcm(const DataMatrix& x, const AssignmentMatrix& u,
                                       const AssignmentMatrix& v) {
    DataMatrix xt = x.transposed();
    return {row_distances_rcm(xt, v, u).values, Side::Col};
}
inline DistanceTable col_distances(const DataMatrix& x, const AssignmentMatrix& u,
                                   const AssignmentMatrix& v, Objective which) {
    return which == Objective::M ? col_distances_m(x, u, v) : col_distances_rcm(x, u, v);
}

inline DistanceTable kmeans_distances(const DataMatrix& x, const AssignmentMatrix& u) {
    return {x.visit([&](const auto& m) { return detail::kmeans_distances_kernel(m, u); }),
            Side::Row};
}

// ---------------------------------------------------------------------------
// Greedy two-phase assignment

/// Phase 1 assigns the round((1-beta)n) points with the smallest minimum
/// distance, each to its closest cluster, in ascending order of that
/// minimum. Phase 2 takes the round((alpha+beta)n) globally smallest
/// untaken (point, cluster) entries. Ties break on the smaller point
/// index, then the smaller cluster index.
inline AssignmentMatrix greedy_assign(const DistanceTable& table, double alpha, double beta) {
    const Matrixd& d = table.values;
    const Index n = d.rows(), k = d.cols();
    if (n < 1 || k < 1) throw ValidationError("greedy_assign: empty distance table");
    if (!d.allFinite()) throw InternalError("greedy_assign: non-finite distance");

    const PhaseBudgets budgets = phase_budgets(alpha, beta, n);
    if (budgets.phase1 < 0 || budgets.phase2 < 0 || budgets.phase1 > n ||
        budgets.total() > n * k) {
        throw ValidationError("greedy_assign: assignment budget infeasible (phase1=" +
                              std::to_string(budgets.phase1) + ", phase2=" +
                              std::to_string(budgets.phase2) + ", capacity=" +
                              std::to_string(n * k) + ")");
    }

    AssignmentMatrix::Bitmap member = AssignmentMatrix::Bitmap::Zero(n, k);

    std::vector<Index> closest(static_cast<std::size_t>(n));
    std::vector<double> closest_d(static_cast<std::size_t>(n));
    for (Index p = 0; p < n; ++p) {
        Index arg = 0;
        for (Index q = 1; q < k; ++q)
            if (d(p, q) < d(p, arg)) arg = q;
        closest[static_cast<std::size_t>(p)] = arg;
        closest_d[static_cast<std::size_t>(p)] = d(p, arg);
    }
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        const double da = closest_d[static_cast<std::size_t>(a)];
        const double db = closest_d[static_cast<std::size_t>(b)];
        return da != db ? da < db : a < b;
    });
    for (Index r = 0; r < budgets.phase1; ++r) {
        const Index p = order[static_cast<std::size_t>(r)];
        member(p, closest[static_cast<std::size_t>(p)]) = 1;
    }

    if (budgets.phase2 > 0) {
        std::vector<std::tuple<double, Index, Index>> rest;
        rest.reserve(static_cast<std::size_t>(n * k - budgets.phase1));
        for (Index p = 0; p < n; ++p)
            for (Index q = 0; q < k; ++q)
                if (!member(p, q)) rest.emplace_back(d(p, q), p, q);
        const auto take = static_cast<std::size_t>(budgets.phase2);
        std::nth_element(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(take) - 1,
                         rest.end());
        std::sort(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(take));
        for (std::size_t r = 0; r < take; ++r)
            member(std::get<1>(rest[r]), std::get<2>(rest[r])) = 1;
    }
    return AssignmentMatrix(std::move(member));
}

// ---------------------------------------------------------------------------
// Seeding

/// Disjoint exhaustive seeding: distance-weighted farthest-point sampling
/// of k rows as centers, then nearest-center assignment. Deterministic for
/// a given seed.
inline AssignmentMatrix seed_clusters(const DataMatrix& x, Index k, std::uint64_t seed) {
    const Index n = x.rows();
    if (k < 1) throw ValidationError("seed_clusters: k >= 1 required");
    if (k > n) throw ValidationError("seed_clusters: k <= n required (k=" + std::to_string(k) +
                                     ", n=" + std::to_string(n) + ")");
    Rng rng(seed);
    const Vectord rowsq =
        x.visit([](const auto& m) { return Vectord(detail::squared(m) * Vectord::Ones(m.cols())); });

    std::vector<Index> centers;
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);
    Vectord d2 = Vectord::Constant(n, std::numeric_limits<double>::infinity());
    Matrixd center_rows(k, x.cols());

    Index first = rng.below(n);
    centers.push_back(first);
    chosen[static_cast<std::size_t>(first)] = 1;
    center_rows.row(0) = x.visit([&](const auto& m) { return detail::dense_row(m, first); });

    for (Index t = 1; t <= k; ++t) {
        const Index c = centers.back();
        const Index latest = static_cast<Index>(centers.size()) - 1;
        const Vectord dots =
            x.visit([&](const auto& m) { return Vectord(m * center_rows.row(latest).transpose()); });
        for (Index p = 0; p < n; ++p) {
            const double dist = std::max(rowsq(p) - 2.0 * dots(p) + rowsq(c), 0.0);
            if (dist < d2(p)) d2(p) = dist;
        }
        if (t == k) break;

        double total = 0.0;
        for (Index p = 0; p < n; ++p)
            if (!chosen[static_cast<std::size_t>(p)]) total += d2(p);
        Index next = -1;
        if (total > 0.0) {
            double r = rng.u01() * total;
            for (Index p = 0; p < n; ++p) {
                if (chosen[static_cast<std::size_t>(p)]) continue;
                r -= d2(p);
                if (r <= 0.0) {
                    next = p;
                    break;
                }
            }
        }
        if (next < 0) {  // all remaining mass zero (duplicate points): lowest unchosen index
            for (Index p = 0; p < n; ++p)
                if (!chosen[static_cast<std::size_t>(p)]) {
                    next = p;
                    break;
                }
        }
        centers.push_back(next);
        chosen[static_cast<std::size_t>(next)] = 1;
        center_rows.row(t) = x.visit([&](const auto& m) { return detail::dense_row(m, next); });
    }

    const Matrixd dots = x.visit([&](const auto& m) { return Matrixd(m * center_rows.transpose()); });
    AssignmentMatrix::Bitmap member = AssignmentMatrix::Bitmap::Zero(n, k);
    for (Index p = 0; p < n; ++p) {
        Index best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (Index q = 0; q < k; ++q) {
            const double val = rowsq(p) - 2.0 * dots(p, q) + center_rows.row(q).squaredNorm();
            if (val < best_d) {
                best_d = val;
                best = q;
            }
        }
        member(p, best) = 1;
    }
    return AssignmentMatrix(std::move(member));
}

// ---------------------------------------------------------------------------
// One-way NEO-K-Means (initialization path)

/// Iterative one-way NEO-K-Means on the rows of x: k-means-style centroid
/// distances plus the two-phase greedy assignment. Runs at least one
/// assignment pass so the result always satisfies the (alpha, beta)
/// budgets. Column-side initialization is the same call on the transpose.
inline AssignmentMatrix neo_kmeans_oneway(const DataMatrix& x, Index k, double alpha, double beta,
                                          std::uint64_t seed, int t_max = 100,
                                          double tol = 1e-6) {
    NeoParams side;  // column side left at trivially valid defaults
    side.k = k;
    side.alpha_r = alpha;
    side.beta_r = beta;
    auto violations = param_violations(side, x.rows(), /*m=*/1);
    if (!violations.empty()) throw ValidationError(std::move(violations));

    AssignmentMatrix u = seed_clusters(x, k, seed);
    double prev = x.visit([&](const auto& m) { return detail::oneway_objective(m, u); });
    const int passes = std::max(t_max, 1);
    for (int t = 0; t < passes; ++t) {
        u = greedy_assign(kmeans_distances(x, u), alpha, beta);
        const double cur = x.visit([&](const auto& m) { return detail::oneway_objective(m, u); });
        if (std::abs(prev - cur) < tol * (1.0 + std::abs(prev))) break;
        prev = cur;
    }
    return u;
}

// ---------------------------------------------------------------------------
// The alternating NEO-CC solver

inline CoClusterResult neo_cc(const DataMatrix& x, const NeoParams& params,
                              std::optional<std::pair<AssignmentMatrix, AssignmentMatrix>> init =
                                  std::nullopt) {
    const Index n = x.rows(), m = x.cols();
    validate(params, n, m);

    const DataMatrix xt = x.transposed();
    AssignmentMatrix u, v;
    if (init) {
        u = std::move(init->first);
        v = std::move(init->second);
        if (u.points() != n || u.clusters() != params.k)
            throw DimensionMismatch("initial U must be n x k");
        if (v.points() != m || v.clusters() != params.l)
            throw DimensionMismatch("initial V must be m x l");
    } else {
        u = neo_kmeans_oneway(x, params.k, params.alpha_r, params.beta_r, params.seed);
        v = neo_kmeans_oneway(xt, params.l, params.alpha_c, params.beta_c,
                              params.seed ^ 0x9e3779b97f4a7c15ull);
    }

    CoClusterResult result;
    result.params_used = params;
    result.trace.push_back(objective_value(x, u, v, params.objective));

    for (int t = 0; t < params.t_max; ++t) {
        u = greedy_assign(row_distances(x, u, v, params.objective), params.alpha_r,
                          params.beta_r);
        {
            DistanceTable dc{row_distances(xt, v, u, params.objective).values, Side::Col};
            v = greedy_assign(dc, params.alpha_c, params.beta_c);
        }
        const double obj = objective_value(x, u, v, params.objective);
        if (!std::isfinite(obj)) throw InternalError("objective became non-finite");
        const double prev = result.trace.back();
        result.trace.push_back(obj);
        if (std::abs(prev - obj) < params.tol * (1.0 + std::abs(prev))) {
            result.converged = true;
            break;
        }
    }
    result.iterations = static_cast<int>(result.trace.size()) - 1;
    result.row_outliers = u.outliers();
    result.col_outliers = v.outliers();
    result.U = std::move(u);
    result.V = std::move(v);
    return result;
}

// ---------------------------------------------------------------------------
// Parameter estimation

struct ParamEstimate {
    double alpha_r = 0.0;
    double beta_r = 0.0;
    double alpha_c = 0.0;
    double beta_c = 0.0;
};

namespace detail {

inline std::pair<double, double> estimate_side(const DataMatrix& x, Index k, double delta,
                                               double gamma, std::uint64_t seed) {
    const Index n = x.rows();
    const AssignmentMatrix u = neo_kmeans_oneway(x, k, 0.0, 0.0, seed);
    const Matrixd d = kmeans_distances(x, u).values;

    const double dmax = d.maxCoeff();
    if (dmax - d.minCoeff() <= 1e-12 * (1.0 + std::abs(dmax))) return {0.0, 0.0};

    Vectord dmin(n);
    Eigen::VectorXi arg(n);
    for (Index p = 0; p < n; ++p) {
        Index best = 0;
        for (Index q = 1; q < k; ++q)
            if (d(p, q) < d(p, best)) best = q;
        arg(p) = static_cast<int>(best);
        dmin(p) = d(p, best);
    }
    const double mean = dmin.mean();
    const double sd = std::sqrt(std::max((dmin.array() - mean).square().mean(), 0.0));

    Index outliers = 0;
    double extra = 0.0;
    for (Index p = 0; p < n; ++p) {
        if (dmin(p) > mean + delta * sd) ++outliers;
        for (Index q = 0; q < k; ++q)
            if (q != arg(p) && d(p, q) <= gamma * dmin(p)) extra += 1.0;
    }
    double beta = static_cast<double>(outliers) / static_cast<double>(n);
    beta = std::min(beta, static_cast<double>(n - 1) / static_cast<double>(n));
    double alpha = extra / static_cast<double>(n);
    alpha = std::min(alpha, static_cast<double>(k - 1));
    return {alpha, beta};
}

}  // namespace detail

/// Heuristic (alpha, beta) suggestion per side: run disjoint one-way
/// clustering, flag points whose closest-cluster distance exceeds
/// mean + delta * std as outliers, and count near-ties within a factor of
/// gamma as overlap.
inline ParamEstimate estimate_params(const DataMatrix& x, Index k, Index l, double delta = 3.0,
                                     double gamma = 1.2, std::uint64_t seed = 0) {
    if (k < 1 || k > x.rows())
        throw ValidationError("estimate_params: 1 <= k <= n required");
    if (l < 1 || l > x.cols())
        throw ValidationError("estimate_params: 1 <= l <= m required");
    const auto [ar, br] = detail::estimate_side(x, k, delta, gamma, seed);
    const auto [ac, bc] =
        detail::estimate_side(x.transposed(), l, delta, gamma, seed ^ 0x9e3779b97f4a7c15ull);
    return {ar, br, ac, bc};
}

// ---------------------------------------------------------------------------
// Minimizer check for h(z) = sum_i w_i || a_i - c z M ||^2 with projector M

/// Computes the stationary point z* with sqrt(sum w) M z*^T = M sum_i w_i a_i^T
/// and confirms h(z*) <= h(z* + eps r) for `trials` random perturbations.
/// Throws if M is not a projector (|| M M^T - M ||_max > 1e-10) or any
/// weight is nonpositive.
inline bool minimizer_check(const Matrixd& points, const Vectord& weights, const Matrixd& m,
                            std::uint64_t seed = 0, int trials = 100, double eps = 1e-3) {
    if (points.rows() != weights.size())
        throw DimensionMismatch("minimizer_check: one weight per point required");
    if (m.rows() != m.cols() || m.cols() != points.cols())
        throw DimensionMismatch("minimizer_check: M must be square of point dimension");
    if ((weights.array() <= 0.0).any())
        throw ValidationError("minimizer_check: weights must be positive");
    if ((m * m.transpose() - m).cwiseAbs().maxCoeff() > 1e-10)
        throw ValidationError("minimizer_check: M is not a projector");

    const double wsum = weights.sum();
    const double c = 1.0 / std::sqrt(wsum);
    Eigen::RowVectorXd zstar = Eigen::RowVectorXd::Zero(points.cols());
    for (Index i = 0; i < points.rows(); ++i) zstar += weights(i) * points.row(i);
    zstar *= c;

    const auto h = [&](const Eigen::RowVectorXd& z) {
        const Eigen::RowVectorXd zm = c * (z * m);
        double total = 0.0;
        for (Index i = 0; i < points.rows(); ++i)
            total += weights(i) * (points.row(i) - zm).squaredNorm();
        return total;
    };

    const double h0 = h(zstar);
    Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        Eigen::RowVectorXd r(points.cols());
        for (Index j = 0; j < points.cols(); ++j) r(j) = rng.gaussian();
        if (h0 > h(zstar + eps * r) + 1e-12 * (1.0 + std::abs(h0))) return false;
    }
    return true;
}

}  // namespace neocc
