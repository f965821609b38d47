#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Core data model: data matrices (dense or CSR), binary assignment
// matrices with overlap and outliers, normalized cluster indicators,
// and solver parameter validation.

namespace neocc {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrixd = Matrix<double>;
using Vectord = Vector<double>;
using SparseMatrixd = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// ---------------------------------------------------------------------------
// Errors

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IndexError : Error {
    using Error::Error;
};

struct DuplicateAssignment : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct EmptyClustering : Error {
    using Error::Error;
};

struct InternalError : Error {
    using Error::Error;
};

/// One message per violated constraint, joined in what().
struct ValidationError : Error {
    std::vector<std::string> violations;

    explicit ValidationError(std::vector<std::string> v)
        : Error(join(v)), violations(std::move(v)) {}
    explicit ValidationError(const std::string& msg)
        : Error(msg), violations{msg} {}

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s;
        for (const auto& m : v) {
            if (!s.empty()) s += "; ";
            s += m;
        }
        return s;
    }
};

/// Positioned input-file diagnostic (1-based line/column).
struct ParseError : Error {
    std::string file;
    long line = 0;
    long column = 0;

    ParseError(std::string file_, long line_, long column_, const std::string& msg)
        : Error(file_ + ":" + std::to_string(line_) + ":" + std::to_string(column_) +
                ": " + msg),
          file(std::move(file_)), line(line_), column(column_) {}
};

// ---------------------------------------------------------------------------
// Rounding rule for assignment budgets: round half up.

inline Index round_half_up(double x) {
    return static_cast<Index>(std::floor(x + 0.5));
}

/// Greedy assignment budgets for one side: phase 1 places `phase1` distinct
/// points, phase 2 places `phase2` further (point, cluster) pairs.
struct PhaseBudgets {
    Index phase1 = 0;
    Index phase2 = 0;
    Index total() const { return phase1 + phase2; }
};

inline PhaseBudgets phase_budgets(double alpha, double beta, Index n) {
    return {round_half_up((1.0 - beta) * static_cast<double>(n)),
            round_half_up((alpha + beta) * static_cast<double>(n))};
}

// ---------------------------------------------------------------------------
// DataMatrix

enum class Storage { Dense, Sparse };

/// The n x m real matrix being co-clustered. Either dense or CSR; both
/// storages feed the same templated kernels downstream.
class DataMatrix {
  public:
    DataMatrix() = default;

    static DataMatrix dense(Matrixd values) {
        if (values.rows() < 1 || values.cols() < 1)
            throw ValidationError("DataMatrix: n_rows >= 1 and n_cols >= 1 required");
        if (!values.allFinite())
            throw ValidationError("DataMatrix: every entry must be finite");
        DataMatrix x;
        x.storage_ = Storage::Dense;
        x.dense_ = std::move(values);
        return x;
    }

    /// Build CSR storage from coordinate triplets (duplicates are summed).
    static DataMatrix sparse(Index rows, Index cols,
                             const std::vector<Eigen::Triplet<double>>& entries) {
        if (rows < 1 || cols < 1)
            throw ValidationError("DataMatrix: n_rows >= 1 and n_cols >= 1 required");
        for (const auto& t : entries) {
            if (t.row() < 0 || t.row() >= rows || t.col() < 0 || t.col() >= cols)
                throw IndexError("DataMatrix: triplet index out of range");
            if (!std::isfinite(t.value()))
                throw ValidationError("DataMatrix: every entry must be finite");
        }
        DataMatrix x;
        x.storage_ = Storage::Sparse;
        x.sparse_.resize(rows, cols);
        x.sparse_.setFromTriplets(entries.begin(), entries.end());
        x.sparse_.makeCompressed();
        return x;
    }

    Index rows() const {
        return storage_ == Storage::Dense ? dense_.rows() : sparse_.rows();
    }
    Index cols() const {
        return storage_ == Storage::Dense ? dense_.cols() : sparse_.cols();
    }
    Storage storage() const { return storage_; }

    double coeff(Index i, Index j) const {
        return storage_ == Storage::Dense ? dense_(i, j) : sparse_.coeff(i, j);
    }

    const Matrixd& dense_data() const {
        if (storage_ != Storage::Dense) throw InternalError("DataMatrix: not dense");
        return dense_;
    }
    const SparseMatrixd& sparse_data() const {
        if (storage_ != Storage::Sparse) throw InternalError("DataMatrix: not sparse");
        return sparse_;
    }

    Matrixd to_dense() const {
        return storage_ == Storage::Dense ? dense_ : Matrixd(sparse_);
    }

    DataMatrix transposed() const {
        if (storage_ == Storage::Dense) return dense(dense_.transpose());
        DataMatrix x;
        x.storage_ = Storage::Sparse;
        x.sparse_ = sparse_.transpose();
        x.sparse_.makeCompressed();
        return x;
    }

    /// Apply f to whichever representation is held.
    template <typename F>
    decltype(auto) visit(F&& f) const {
        return storage_ == Storage::Dense ? f(dense_) : f(sparse_);
    }

  private:
    Storage storage_ = Storage::Dense;
    Matrixd dense_;
    SparseMatrixd sparse_;
};

// ---------------------------------------------------------------------------
// AssignmentMatrix

/// Binary membership table U in {0,1}^(points x clusters). A point with an
/// all-zero row is an outlier; a point with two or more ones overlaps.
/// Immutable after construction.
class AssignmentMatrix {
  public:
    using Bitmap = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

    AssignmentMatrix() = default;

    AssignmentMatrix(Index n_points, Index n_clusters)
        : membership_(Bitmap::Zero(n_points, n_clusters)),
          sizes_(Eigen::VectorXi::Zero(n_clusters)) {
        if (n_points < 1 || n_clusters < 1)
            throw ValidationError("AssignmentMatrix: positive dimensions required");
    }

    explicit AssignmentMatrix(Bitmap membership) : membership_(std::move(membership)) {
        if (membership_.rows() < 1 || membership_.cols() < 1)
            throw ValidationError("AssignmentMatrix: positive dimensions required");
        if ((membership_.array() > 1).any())
            throw ValidationError("AssignmentMatrix: membership must be binary");
        recompute_sizes();
    }

    /// Each point its own singleton cluster (the identity clustering).
    static AssignmentMatrix identity(Index n) {
        Bitmap m = Bitmap::Zero(n, n);
        for (Index i = 0; i < n; ++i) m(i, i) = 1;
        return AssignmentMatrix(std::move(m));
    }

    Index points() const { return membership_.rows(); }
    Index clusters() const { return membership_.cols(); }

    bool contains(Index point, Index cluster) const {
        check_point(point);
        check_cluster(cluster);
        return membership_(point, cluster) != 0;
    }

    const Bitmap& membership() const { return membership_; }
    const Eigen::VectorXi& cluster_sizes() const { return sizes_; }
    Index cluster_size(Index c) const {
        check_cluster(c);
        return sizes_(c);
    }

    Index total_assignments() const { return sizes_.cast<Index>().sum(); }

    Index memberships_of(Index point) const {
        check_point(point);
        Index d = 0;
        for (Index c = 0; c < clusters(); ++c) d += membership_(point, c);
        return d;
    }
    bool is_outlier(Index point) const { return memberships_of(point) == 0; }
    bool is_overlapping(Index point) const { return memberships_of(point) >= 2; }

    std::vector<Index> point_clusters(Index point) const {
        check_point(point);
        std::vector<Index> out;
        for (Index c = 0; c < clusters(); ++c)
            if (membership_(point, c)) out.push_back(c);
        return out;
    }

    std::vector<Index> cluster_members(Index c) const {
        check_cluster(c);
        std::vector<Index> out;
        for (Index i = 0; i < points(); ++i)
            if (membership_(i, c)) out.push_back(i);
        return out;
    }

    std::vector<Index> outliers() const {
        std::vector<Index> out;
        for (Index i = 0; i < points(); ++i)
            if (is_outlier(i)) out.push_back(i);
        return out;
    }

    /// Dense 0/1 indicator, the U (or V) of the matrix formulas.
    template <typename Scalar = double>
    Matrix<Scalar> indicator() const {
        return membership_.cast<Scalar>();
    }

    /// u_c / sqrt(n_c); the all-zero vector for an empty cluster.
    template <typename Scalar = double>
    Vector<Scalar> normalized_column_values(Index c) const {
        check_cluster(c);
        Vector<Scalar> v = membership_.col(c).cast<Scalar>();
        if (sizes_(c) > 0) v /= std::sqrt(static_cast<Scalar>(sizes_(c)));
        return v;
    }

    friend bool operator==(const AssignmentMatrix& a, const AssignmentMatrix& b) {
        return a.membership_.rows() == b.membership_.rows() &&
               a.membership_.cols() == b.membership_.cols() &&
               a.membership_ == b.membership_;
    }
    friend bool operator!=(const AssignmentMatrix& a, const AssignmentMatrix& b) {
        return !(a == b);
    }

  private:
    void check_point(Index p) const {
        if (p < 0 || p >= points()) throw IndexError("point index out of range");
    }
    void check_cluster(Index c) const {
        if (c < 0 || c >= clusters()) throw IndexError("cluster index out of range");
    }
    void recompute_sizes() {
        sizes_ = membership_.cast<int>().colwise().sum();
    }

    Bitmap membership_;
    Eigen::VectorXi sizes_;
};

inline AssignmentMatrix build_assignment(Index n_points, Index n_clusters,
                                         const std::vector<std::pair<Index, Index>>& memberships) {
    if (n_points < 1 || n_clusters < 1)
        throw ValidationError("build_assignment: positive dimensions required");
    AssignmentMatrix::Bitmap m = AssignmentMatrix::Bitmap::Zero(n_points, n_clusters);
    for (const auto& [p, c] : memberships) {
        if (p < 0 || p >= n_points) throw IndexError("build_assignment: point index out of range");
        if (c < 0 || c >= n_clusters) throw IndexError("build_assignment: cluster index out of range");
        if (m(p, c))
            throw DuplicateAssignment("build_assignment: duplicate pair (" +
                                      std::to_string(p) + ", " + std::to_string(c) + ")");
        m(p, c) = 1;
    }
    return AssignmentMatrix(std::move(m));
}

/// A cluster indicator scaled to unit norm (zero vector if the cluster is
/// empty). Its outer product projects onto the cluster-averaged subspace.
struct NormalizedColumn {
    Index cluster_index = 0;
    Vectord values;
};

inline NormalizedColumn normalized_column(const AssignmentMatrix& a, Index c) {
    return {c, a.normalized_column_values(c)};
}

// ---------------------------------------------------------------------------
// NeoParams

enum class Objective { M, RCM };

inline const char* objective_name(Objective o) {
    return o == Objective::M ? "M" : "RCM";
}

struct NeoParams {
    Index k = 1;              ///< row cluster count
    Index l = 1;              ///< column cluster count
    double alpha_r = 0.0;     ///< row overlap ratio (may be negative down to -beta_r)
    double beta_r = 0.0;      ///< row outlier ratio in [0, 1)
    double alpha_c = 0.0;
    double beta_c = 0.0;
    Objective objective = Objective::M;
    int t_max = 100;
    double tol = 1e-6;        ///< relative objective-change threshold
    std::uint64_t seed = 0;
};

/// All violated NeoParams constraints for an n x m matrix, by name.
inline std::vector<std::string> param_violations(const NeoParams& p, Index n, Index m) {
    std::vector<std::string> v;
    auto num = [](double x) { return std::to_string(x); };
    if (p.k < 1) v.push_back("k >= 1 violated (k=" + std::to_string(p.k) + ")");
    if (p.l < 1) v.push_back("l >= 1 violated (l=" + std::to_string(p.l) + ")");
    if (p.k > n)
        v.push_back("k <= n violated (k=" + std::to_string(p.k) + ", n=" + std::to_string(n) + ")");
    if (p.l > m)
        v.push_back("l <= m violated (l=" + std::to_string(p.l) + ", m=" + std::to_string(m) + ")");
    if (!(p.beta_r >= 0.0 && p.beta_r < 1.0))
        v.push_back("0 <= beta_r < 1 violated (beta_r=" + num(p.beta_r) + ")");
    if (!(p.beta_c >= 0.0 && p.beta_c < 1.0))
        v.push_back("0 <= beta_c < 1 violated (beta_c=" + num(p.beta_c) + ")");
    if (!(p.alpha_r >= -p.beta_r))
        v.push_back("alpha_r >= -beta_r violated (alpha_r=" + num(p.alpha_r) +
                    ", beta_r=" + num(p.beta_r) + ")");
    if (!(p.alpha_c >= -p.beta_c))
        v.push_back("alpha_c >= -beta_c violated (alpha_c=" + num(p.alpha_c) +
                    ", beta_c=" + num(p.beta_c) + ")");
    if (p.k >= 1 && round_half_up((1.0 + p.alpha_r) * static_cast<double>(n)) > p.k * n)
        v.push_back("round((1+alpha_r)*n) <= k*n violated (round=" +
                    std::to_string(round_half_up((1.0 + p.alpha_r) * static_cast<double>(n))) +
                    ", k*n=" + std::to_string(p.k * n) + ")");
    if (p.l >= 1 && round_half_up((1.0 + p.alpha_c) * static_cast<double>(m)) > p.l * m)
        v.push_back("round((1+alpha_c)*m) <= l*m violated (round=" +
                    std::to_string(round_half_up((1.0 + p.alpha_c) * static_cast<double>(m))) +
                    ", l*m=" + std::to_string(p.l * m) + ")");
    // the phase budgets round separately and can exceed the combined form by one
    if (p.k >= 1 && phase_budgets(p.alpha_r, p.beta_r, n).total() > p.k * n)
        v.push_back("round((1-beta_r)*n) + round((alpha_r+beta_r)*n) <= k*n violated (total=" +
                    std::to_string(phase_budgets(p.alpha_r, p.beta_r, n).total()) +
                    ", k*n=" + std::to_string(p.k * n) + ")");
    if (p.l >= 1 && phase_budgets(p.alpha_c, p.beta_c, m).total() > p.l * m)
        v.push_back("round((1-beta_c)*m) + round((alpha_c+beta_c)*m) <= l*m violated (total=" +
                    std::to_string(phase_budgets(p.alpha_c, p.beta_c, m).total()) +
                    ", l*m=" + std::to_string(p.l * m) + ")");
    if (p.t_max < 0) v.push_back("t_max >= 0 violated");
    if (!(p.tol >= 0.0)) v.push_back("tol >= 0 violated");
    return v;
}

/// Throws ValidationError listing every violated constraint.
inline void validate(const NeoParams& p, Index n, Index m) {
    auto v = param_violations(p, n, m);
    if (!v.empty()) throw ValidationError(std::move(v));
}

}  // namespace neocc
