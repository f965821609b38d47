#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "neocc/core.hpp"
#include "neocc/random.hpp"
#include "oracles.hpp"

using namespace neocc;

TEST_CASE("build_assignment: disjoint exhaustive") {
    const auto u = build_assignment(3, 2, {{0, 0}, {1, 0}, {2, 1}});
    CHECK(u.cluster_size(0) == 2);
    CHECK(u.cluster_size(1) == 1);
    CHECK(u.total_assignments() == 3);
    CHECK(u.outliers().empty());
    for (Index p = 0; p < 3; ++p) CHECK_FALSE(u.is_overlapping(p));
}

TEST_CASE("build_assignment: overlap and outliers") {
    const auto u = build_assignment(3, 2, {{0, 0}, {0, 1}});
    CHECK(u.is_overlapping(0));
    CHECK(u.is_outlier(1));
    CHECK(u.is_outlier(2));
    CHECK(u.outliers() == std::vector<Index>{1, 2});
    CHECK(u.point_clusters(0) == std::vector<Index>{0, 1});
}

TEST_CASE("build_assignment: errors") {
    CHECK_THROWS_AS(build_assignment(3, 2, {{0, 5}}), IndexError);
    CHECK_THROWS_AS(build_assignment(3, 2, {{5, 0}}), IndexError);
    CHECK_THROWS_AS(build_assignment(3, 2, {{0, 0}, {0, 0}}), DuplicateAssignment);
}

TEST_CASE("normalized_column examples") {
    const auto u = build_assignment(4, 3, {{0, 0}, {1, 0}, {2, 1}});
    const auto nc = normalized_column(u, 0);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(nc.values(0) == doctest::Approx(r));
    CHECK(nc.values(1) == doctest::Approx(r));
    CHECK(nc.values(2) == 0.0);
    CHECK(nc.values(3) == 0.0);

    const auto singleton = normalized_column(u, 1);
    CHECK(singleton.values(2) == 1.0);
    CHECK(singleton.values.sum() == 1.0);

    const auto empty = normalized_column(u, 2);
    CHECK(empty.values.isZero(0.0));
}

TEST_CASE("normalized column: unit norm and projector property") {
    Rng rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        const Index n = 3 + rng.below(10);
        const Index k = 1 + rng.below(4);
        const auto a = oracle::random_assignment(rng, n, k);
        for (Index c = 0; c < k; ++c) {
            const Vectord v = a.normalized_column_values(c);
            if (a.cluster_size(c) > 0)
                CHECK(std::abs(v.squaredNorm() - 1.0) <= 1e-12);
            else
                CHECK(v.isZero(0.0));
            for (Index p = 0; p < n; ++p)
                CHECK((v(p) != 0.0) == a.contains(p, c));
            const Matrixd proj = v * v.transpose();
            CHECK(((proj * proj) - proj).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("trace-count identity: total ones equals sum of sizes") {
    Rng rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const auto a = oracle::random_assignment(rng, 4 + rng.below(12), 1 + rng.below(5));
        Index ones = 0;
        for (Index p = 0; p < a.points(); ++p)
            for (Index c = 0; c < a.clusters(); ++c)
                if (a.contains(p, c)) ++ones;
        CHECK(ones == a.total_assignments());
        CHECK(ones == a.cluster_sizes().cast<Index>().sum());
    }
}

TEST_CASE("validate examples") {
    NeoParams ok;
    ok.k = 2;
    ok.l = 2;
    ok.alpha_r = 0.1;
    ok.beta_r = 0.05;
    CHECK_NOTHROW(validate(ok, 100, 50));

    NeoParams overflow;
    overflow.k = 2;
    overflow.l = 2;
    overflow.alpha_r = 1.5;
    try {
        validate(overflow, 10, 10);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        bool found = false;
        for (const auto& v : e.violations)
            if (v.find("round((1+alpha_r)*n) <= k*n") != std::string::npos) found = true;
        CHECK(found);
    }

    NeoParams beta_bound;
    beta_bound.beta_r = 1.0;
    try {
        validate(beta_bound, 10, 10);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        bool found = false;
        for (const auto& v : e.violations)
            if (v.find("beta_r") != std::string::npos) found = true;
        CHECK(found);
    }

    NeoParams neg;
    neg.k = 2;
    neg.l = 2;
    neg.alpha_r = -0.2;
    neg.beta_r = 0.1;
    CHECK_THROWS_AS(validate(neg, 20, 20), ValidationError);  // alpha_r < -beta_r

    neg.alpha_r = -0.1;
    CHECK_NOTHROW(validate(neg, 20, 20));  // alpha_r == -beta_r allowed

    NeoParams degenerate;
    degenerate.k = 5;
    degenerate.l = 1;
    CHECK_THROWS_AS(validate(degenerate, 3, 10), ValidationError);  // k > n

    // separate phase rounding overflows the table even though the combined
    // form fits: round(0.5) + round(0.5) = 2 > 1*1
    NeoParams half;
    half.k = 1;
    half.l = 1;
    half.beta_r = 0.5;
    CHECK_THROWS_AS(validate(half, 1, 4), ValidationError);
}

TEST_CASE("phase budgets follow the case-study rounding") {
    const auto c = phase_budgets(1.0 / 7, 1.0 / 7, 7);
    CHECK(c.phase1 == 6);
    CHECK(c.phase2 == 2);
    const auto d = phase_budgets(-1.0 / 6, 1.0 / 6, 6);
    CHECK(d.phase1 == 5);
    CHECK(d.phase2 == 0);
    const auto plain = phase_budgets(0.0, 0.0, 9);
    CHECK(plain.phase1 == 9);
    CHECK(plain.phase2 == 0);
}

TEST_CASE("DataMatrix rejects non-finite values and empty shapes") {
    Matrixd bad(1, 2);
    bad << 1.0, std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(DataMatrix::dense(bad), ValidationError);
    CHECK_THROWS_AS(DataMatrix::dense(Matrixd(0, 3)), ValidationError);
    CHECK_THROWS_AS(DataMatrix::sparse(2, 2, {{0, 0, std::numeric_limits<double>::infinity()}}),
                    ValidationError);
    CHECK_THROWS_AS(DataMatrix::sparse(2, 2, {{3, 0, 1.0}}), IndexError);
}

TEST_CASE("DataMatrix dense/sparse views agree entrywise") {
    Rng rng(3);
    const Matrixd x = oracle::random_matrix(rng, 5, 4);
    const DataMatrix d = DataMatrix::dense(x);
    const DataMatrix s = oracle::sparse_copy(x);
    CHECK(d.storage() == Storage::Dense);
    CHECK(s.storage() == Storage::Sparse);
    for (Index i = 0; i < 5; ++i)
        for (Index j = 0; j < 4; ++j) CHECK(d.coeff(i, j) == s.coeff(i, j));
    CHECK((s.to_dense() - x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s.transposed().to_dense() - x.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("AssignmentMatrix identity and equality") {
    const auto id = AssignmentMatrix::identity(4);
    CHECK(id.points() == 4);
    CHECK(id.clusters() == 4);
    CHECK(id.total_assignments() == 4);
    CHECK(id == AssignmentMatrix::identity(4));
    CHECK(id != AssignmentMatrix::identity(5));
    CHECK(id != build_assignment(4, 4, {{0, 0}, {1, 1}, {2, 2}, {3, 2}}));
}
