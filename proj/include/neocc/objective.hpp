#pragma once

#include <algorithm>
#include <vector>

#include "neocc/core.hpp"

// Objective evaluation. Two variants:
//   M   — squared deviation of every covered entry from the mean of each
//         co-cluster block the entry belongs to;
//   RCM — squared deviation from row-cluster mean + column-cluster mean
//         - block mean (the bias-removed residue).
// Every objective has a matrix-product fast form here and an element-wise
// oracle (objective_m_elementwise below; the RCM oracle lives with the
// tests) used to cross-check it.

namespace neocc {

struct CoClusterMeanTable {
    Matrixd means;       ///< k x l, zero where either cluster is empty
    Matrixd block_sums;  ///< k x l sums over each (row cluster, col cluster) block
    Eigen::VectorXi row_sizes;
    Eigen::VectorXi col_sizes;
};

struct ResidueBlock {
    Index row_cluster = 0;
    Index col_cluster = 0;
    Matrixd values;  ///< n x m, support inside the block
};

namespace detail {

template <typename Derived>
auto squared(const Eigen::MatrixBase<Derived>& x) {
    return x.derived().array().square().matrix().eval();
}

template <typename Derived>
auto squared(const Eigen::SparseMatrixBase<Derived>& x) {
    return x.derived().cwiseProduct(x.derived()).eval();
}

inline void check_dims(Index rows, Index cols, const AssignmentMatrix& u,
                       const AssignmentMatrix& v) {
    if (u.points() != rows)
        throw DimensionMismatch("row assignment has " + std::to_string(u.points()) +
                                " points, matrix has " + std::to_string(rows) + " rows");
    if (v.points() != cols)
        throw DimensionMismatch("column assignment has " + std::to_string(v.points()) +
                                " points, matrix has " + std::to_string(cols) + " columns");
}

template <typename Scalar>
struct BlockStats {
    Matrix<Scalar> sums;    // k x l
    Matrix<Scalar> sqsums;  // k x l
    Matrix<Scalar> means;   // k x l, zero where a side is empty
    Eigen::VectorXi row_sizes;
    Eigen::VectorXi col_sizes;
};

template <typename XT>
BlockStats<typename XT::Scalar> block_stats(const XT& x, const AssignmentMatrix& u,
                                            const AssignmentMatrix& v) {
    using S = typename XT::Scalar;
    check_dims(x.rows(), x.cols(), u, v);
    const Matrix<S> ud = u.indicator<S>();
    const Matrix<S> vd = v.indicator<S>();
    const Matrix<S> xv = x * vd;
    const Matrix<S> x2v = squared(x) * vd;

    BlockStats<S> st;
    st.sums = ud.transpose() * xv;
    st.sqsums = ud.transpose() * x2v;
    st.row_sizes = u.cluster_sizes();
    st.col_sizes = v.cluster_sizes();
    st.means.setZero(u.clusters(), v.clusters());
    for (Index q = 0; q < u.clusters(); ++q)
        for (Index j = 0; j < v.clusters(); ++j)
            if (st.row_sizes(q) > 0 && st.col_sizes(j) > 0)
                st.means(q, j) = st.sums(q, j) /
                                 static_cast<S>(st.row_sizes(q)) /
                                 static_cast<S>(st.col_sizes(j));
    return st;
}

template <typename XT>
typename XT::Scalar objective_m_impl(const XT& x, const AssignmentMatrix& u,
                                     const AssignmentMatrix& v) {
    using S = typename XT::Scalar;
    const auto st = block_stats(x, u, v);
    S total = 0;
    for (Index q = 0; q < u.clusters(); ++q)
        for (Index j = 0; j < v.clusters(); ++j) {
            S term = st.sqsums(q, j);
            if (st.row_sizes(q) > 0 && st.col_sizes(j) > 0)
                term -= st.sums(q, j) * st.sums(q, j) /
                        (static_cast<S>(st.row_sizes(q)) * static_cast<S>(st.col_sizes(j)));
            total += term;
        }
    return std::max<S>(total, 0);
}

/// Row-cluster column means: k x m matrix with row q = mean of the rows in
/// cluster q (zero row when empty).
template <typename XT>
Matrix<typename XT::Scalar> row_cluster_means(const XT& x, const AssignmentMatrix& u) {
    using S = typename XT::Scalar;
    const Matrix<S> ud = u.indicator<S>();
    Matrix<S> utx = (x.transpose() * ud).transpose();
    for (Index q = 0; q < u.clusters(); ++q) {
        const Index nq = u.cluster_size(q);
        utx.row(q) *= nq > 0 ? S(1) / static_cast<S>(nq) : S(0);
    }
    return utx;
}

/// Column-cluster row means: n x l matrix with column j = mean over the
/// columns in cluster j (zero column when empty).
template <typename XT>
Matrix<typename XT::Scalar> col_cluster_means(const XT& x, const AssignmentMatrix& v) {
    using S = typename XT::Scalar;
    const Matrix<S> vd = v.indicator<S>();
    Matrix<S> xv = x * vd;
    for (Index j = 0; j < v.clusters(); ++j) {
        const Index mj = v.cluster_size(j);
        xv.col(j) *= mj > 0 ? S(1) / static_cast<S>(mj) : S(0);
    }
    return xv;
}

// For each block (q, j), expanding || (D(u_q) - u^u^T) X (D(v_j) - v^v^T) ||_F^2
// over the block entries gives
//   sqsum(q,j) - n_q * sum_{t in C_j} P(q,t)^2 - m_j * sum_{s in C_q} Q(s,j)^2
//              + n_q * m_j * mean(q,j)^2
// with P the row-cluster column means and Q the column-cluster row means.
template <typename XT>
typename XT::Scalar objective_rcm_impl(const XT& x, const AssignmentMatrix& u,
                                       const AssignmentMatrix& v) {
    using S = typename XT::Scalar;
    const auto st = block_stats(x, u, v);
    const Matrix<S> p = row_cluster_means(x, u);  // k x m
    const Matrix<S> q = col_cluster_means(x, v);  // n x l
    const Matrix<S> vd = v.indicator<S>();
    const Matrix<S> ud = u.indicator<S>();
    const Matrix<S> ppv = p.array().square().matrix() * vd;        // k x l
    const Matrix<S> utqq = ud.transpose() * q.array().square().matrix();  // k x l

    S total = 0;
    for (Index i = 0; i < u.clusters(); ++i)
        for (Index j = 0; j < v.clusters(); ++j) {
            const S nq = static_cast<S>(st.row_sizes(i));
            const S mj = static_cast<S>(st.col_sizes(j));
            total += st.sqsums(i, j) - nq * ppv(i, j) - mj * utqq(i, j) +
                     nq * mj * st.means(i, j) * st.means(i, j);
        }
    return std::max<S>(total, 0);
}

template <typename XT>
ResidueBlock residue_rcm_impl(const XT& x, const AssignmentMatrix& u,
                              const AssignmentMatrix& v, Index i, Index j) {
    using S = typename XT::Scalar;
    check_dims(x.rows(), x.cols(), u, v);
    if (i < 0 || i >= u.clusters()) throw IndexError("row cluster index out of range");
    if (j < 0 || j >= v.clusters()) throw IndexError("column cluster index out of range");

    ResidueBlock block{i, j, Matrixd::Zero(x.rows(), x.cols())};
    if (u.cluster_size(i) == 0 || v.cluster_size(j) == 0) return block;

    const Matrix<S> p = row_cluster_means(x, u);
    const Matrix<S> q = col_cluster_means(x, v);
    const auto st = block_stats(x, u, v);
    const S mu = st.means(i, j);
    for (Index s : u.cluster_members(i))
        for (Index t : v.cluster_members(j))
            block.values(s, t) = static_cast<double>(x.coeff(s, t) - p(i, t) - q(s, j) + mu);
    return block;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// cocluster_means

template <typename Derived>
CoClusterMeanTable cocluster_means(const Eigen::MatrixBase<Derived>& x,
                                   const AssignmentMatrix& u, const AssignmentMatrix& v) {
    auto st = detail::block_stats(x.derived(), u, v);
    return {st.means.template cast<double>(), st.sums.template cast<double>(),
            st.row_sizes, st.col_sizes};
}

template <typename Derived>
CoClusterMeanTable cocluster_means(const Eigen::SparseMatrixBase<Derived>& x,
                                   const AssignmentMatrix& u, const AssignmentMatrix& v) {
    auto st = detail::block_stats(x.derived(), u, v);
    return {st.means.template cast<double>(), st.sums.template cast<double>(),
            st.row_sizes, st.col_sizes};
}

inline CoClusterMeanTable cocluster_means(const DataMatrix& x, const AssignmentMatrix& u,
                                          const AssignmentMatrix& v) {
    return x.visit([&](const auto& m) { return cocluster_means(m, u, v); });
}

// ---------------------------------------------------------------------------
// NEO-CC-M

template <typename Derived>
typename Derived::Scalar objective_m(const Eigen::MatrixBase<Derived>& x,
                                     const AssignmentMatrix& u, const AssignmentMatrix& v) {
    return detail::objective_m_impl(x.derived(), u, v);
}

template <typename Derived>
typename Derived::Scalar objective_m(const Eigen::SparseMatrixBase<Derived>& x,
                                     const AssignmentMatrix& u, const AssignmentMatrix& v) {
    return detail::objective_m_impl(x.derived(), u, v);
}

inline double objective_m(const DataMatrix& x, const AssignmentMatrix& u,
                          const AssignmentMatrix& v) {
    return x.visit([&](const auto& m) { return objective_m(m, u, v); });
}

/// Element-wise oracle for objective_m: a literal loop over entries and
/// cluster-pair combinations with block means recomputed from membership
/// lists. Deliberately shares no code with the matrix form.
inline double objective_m_elementwise(const Matrixd& x, const AssignmentMatrix& u,
                                      const AssignmentMatrix& v) {
    detail::check_dims(x.rows(), x.cols(), u, v);
    const Index k = u.clusters(), l = v.clusters();
    std::vector<std::vector<double>> mean(static_cast<std::size_t>(k),
                                          std::vector<double>(static_cast<std::size_t>(l), 0.0));
    for (Index p = 0; p < k; ++p) {
        const auto rows = u.cluster_members(p);
        for (Index q = 0; q < l; ++q) {
            const auto cols = v.cluster_members(q);
            if (rows.empty() || cols.empty()) continue;
            double s = 0.0;
            for (Index r : rows)
                for (Index c : cols) s += x(r, c);
            mean[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] =
                s / static_cast<double>(rows.size()) / static_cast<double>(cols.size());
        }
    }
    double total = 0.0;
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < x.cols(); ++j) {
            for (Index p = 0; p < k; ++p) {
                if (!u.membership()(i, p)) continue;
                for (Index q = 0; q < l; ++q) {
                    if (!v.membership()(j, q)) continue;
                    const double d =
                        x(i, j) - mean[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
                    total += d * d;
                }
            }
        }
    }
    return total;
}

inline double objective_m_elementwise(const DataMatrix& x, const AssignmentMatrix& u,
                                      const AssignmentMatrix& v) {
    return objective_m_elementwise(x.to_dense(), u, v);
}

// ---------------------------------------------------------------------------
// NEO-CC-RCM (masked residue form)

template <typename Derived>
typename Derived::Scalar objective_rcm(const Eigen::MatrixBase<Derived>& x,
                                       const AssignmentMatrix& u, const AssignmentMatrix& v) {
    return detail::objective_rcm_impl(x.derived(), u, v);
}

template <typename Derived>
typename Derived::Scalar objective_rcm(const Eigen::SparseMatrixBase<Derived>& x,
                                       const AssignmentMatrix& u, const AssignmentMatrix& v) {
    return detail::objective_rcm_impl(x.derived(), u, v);
}

inline double objective_rcm(const DataMatrix& x, const AssignmentMatrix& u,
                            const AssignmentMatrix& v) {
    return x.visit([&](const auto& m) { return objective_rcm(m, u, v); });
}

/// Diagnostic only: the residue with unmasked row/column mean terms,
/// sum_ij || D(u_i) X D(v_j) - u^u^T X - X v^v^T + u^u^T X v^v^T ||_F^2.
/// It leaks residue outside the block and is not a solver target; the
/// masked objective_rcm is the canonical form.
inline double objective_rcm_unmasked(const Matrixd& x, const AssignmentMatrix& u,
                                     const AssignmentMatrix& v) {
    detail::check_dims(x.rows(), x.cols(), u, v);
    double total = 0.0;
    for (Index i = 0; i < u.clusters(); ++i) {
        const Vectord ui = u.indicator().col(i);
        const Vectord uh = u.normalized_column_values(i);
        for (Index j = 0; j < v.clusters(); ++j) {
            const Vectord vj = v.indicator().col(j);
            const Vectord vh = v.normalized_column_values(j);
            const Matrixd h = ui.asDiagonal() * x * vj.asDiagonal() -
                              uh * (uh.transpose() * x) - (x * vh) * vh.transpose() +
                              uh * (uh.transpose() * x * vh) * vh.transpose();
            total += h.squaredNorm();
        }
    }
    return total;
}

inline double objective_rcm_unmasked(const DataMatrix& x, const AssignmentMatrix& u,
                                     const AssignmentMatrix& v) {
    return objective_rcm_unmasked(x.to_dense(), u, v);
}

// ---------------------------------------------------------------------------
// Residue block extraction

template <typename Derived>
ResidueBlock residue_rcm(const Eigen::MatrixBase<Derived>& x, const AssignmentMatrix& u,
                         const AssignmentMatrix& v, Index i, Index j) {
    return detail::residue_rcm_impl(x.derived(), u, v, i, j);
}

template <typename Derived>
ResidueBlock residue_rcm(const Eigen::SparseMatrixBase<Derived>& x, const AssignmentMatrix& u,
                         const AssignmentMatrix& v, Index i, Index j) {
    return detail::residue_rcm_impl(x.derived(), u, v, i, j);
}

inline ResidueBlock residue_rcm(const DataMatrix& x, const AssignmentMatrix& u,
                                const AssignmentMatrix& v, Index i, Index j) {
    return x.visit([&](const auto& m) { return residue_rcm(m, u, v, i, j); });
}

/// Objective for the selected variant.
inline double objective_value(const DataMatrix& x, const AssignmentMatrix& u,
                              const AssignmentMatrix& v, Objective which) {
    return which == Objective::M ? objective_m(x, u, v) : objective_rcm(x, u, v);
}

}  // namespace neocc
