#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "neocc/eval.hpp"
#include "oracles.hpp"

using namespace neocc;

TEST_CASE("f1_score: hand examples") {
    const std::vector<std::vector<Index>> truth = {{0, 1}, {2}};
    const std::vector<std::vector<Index>> same = {{0, 1}, {2}};
    CHECK(f1_score(same, truth) == 1.0);

    // predicted {a,b},{b,c} vs truth {a,b},{c} -> 5/6
    const std::vector<std::vector<Index>> pred = {{0, 1}, {1, 2}};
    CHECK(f1_score(pred, truth) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));

    const std::vector<std::vector<Index>> disjoint = {{5, 6}, {7}};
    CHECK(f1_score(disjoint, truth) == 0.0);

    CHECK_THROWS_AS(f1_score({}, truth), EmptyClustering);
    CHECK_THROWS_AS(f1_score(pred, {}), EmptyClustering);
}

TEST_CASE("f1_score: symmetry and relabeling invariance") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 6 + rng.below(10);
        const auto a = oracle::random_assignment(rng, n, 2 + rng.below(3), 0.2, 0.3);
        const auto b = oracle::random_assignment(rng, n, 2 + rng.below(3), 0.2, 0.3);
        auto ca = clusters_of(a);
        auto cb = clusters_of(b);
        if (ca.empty() || cb.empty()) continue;
        CHECK(f1_score(ca, cb) == doctest::Approx(f1_score(cb, ca)).epsilon(1e-12));

        auto shuffled = ca;
        std::reverse(shuffled.begin(), shuffled.end());
        CHECK(f1_score(shuffled, cb) == doctest::Approx(f1_score(ca, cb)).epsilon(1e-12));
        CHECK(f1_score(shuffled, ca) == 1.0);

        // perturbing one cluster breaks the perfect score
        auto perturbed = ca;
        perturbed[0].push_back(n + 1);
        CHECK(f1_score(perturbed, ca) < 1.0);
    }
}

TEST_CASE("generate_planted: counts and determinism") {
    PlantedConfig cfg;
    cfg.n = 50;
    cfg.m = 30;
    cfg.k = 3;
    cfg.l = 3;
    cfg.overlap_frac_r = 0.2;
    cfg.outlier_frac_r = 0.1;
    cfg.overlap_frac_c = 0.1;
    cfg.noise_sd = 0.05;
    cfg.seed = 5;
    const auto inst = generate_planted(cfg);

    Index two_labels = 0, zero_labels = 0;
    for (const auto& ls : inst.rows.labels) {
        if (ls.size() == 2) ++two_labels;
        if (ls.empty()) ++zero_labels;
    }
    CHECK(two_labels == 10);  // round(0.2 * 50)
    CHECK(zero_labels == 5);  // round(0.1 * 50)

    const auto again = generate_planted(cfg);
    CHECK((inst.X.to_dense() - again.X.to_dense()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(inst.rows.labels == again.rows.labels);
    CHECK(inst.cols.labels == again.cols.labels);

    PlantedConfig bad = cfg;
    bad.outlier_frac_r = 0.9;
    bad.overlap_frac_r = 0.5;
    CHECK_THROWS_AS(generate_planted(bad), ValidationError);
}

TEST_CASE("generate_planted: zero noise blocks are exact and recoverable") {
    PlantedConfig cfg;
    cfg.n = 40;
    cfg.m = 24;
    cfg.k = 2;
    cfg.l = 2;
    cfg.signal = 1.0;
    cfg.seed = 12;
    const auto inst = generate_planted(cfg);
    const Matrixd x = inst.X.to_dense();
    for (Index i = 0; i < cfg.n; ++i)
        for (Index j = 0; j < cfg.m; ++j) {
            const bool in_block = !inst.rows.labels[size_t(i)].empty() &&
                                  inst.rows.labels[size_t(i)] == inst.cols.labels[size_t(j)];
            CHECK(x(i, j) == (in_block ? 1.0 : 0.0));
        }

    NeoParams p;
    p.k = 2;
    p.l = 2;
    p.seed = 3;
    const auto res = neo_cc(inst.X, p);
    CHECK(f1_score(clusters_of(res.U), inst.rows.clusters()) == 1.0);
    CHECK(f1_score(clusters_of(res.V), inst.cols.clusters()) == 1.0);
}

TEST_CASE("overlap-aware solving beats the MSSR mode on planted overlap") {
    double neo_mean = 0.0, mssr_mean = 0.0;
    const int seeds = 6;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        PlantedConfig cfg;
        cfg.n = 80;
        cfg.m = 50;
        cfg.k = 2;
        cfg.l = 2;
        cfg.overlap_frac_r = 0.2;
        cfg.overlap_frac_c = 0.2;
        cfg.outlier_frac_r = 0.05;
        cfg.outlier_frac_c = 0.05;
        cfg.noise_sd = 0.05;
        cfg.seed = 60 + seed;
        const auto inst = generate_planted(cfg);
        const auto truth = inst.cols.clusters();

        Index row_labels = 0, col_labels = 0;
        for (const auto& ls : inst.rows.labels) row_labels += static_cast<Index>(ls.size());
        for (const auto& ls : inst.cols.labels) col_labels += static_cast<Index>(ls.size());
        NeoParams p;
        p.k = 2;
        p.l = 2;
        p.alpha_r = double(row_labels - cfg.n) / double(cfg.n);
        p.beta_r = 0.05;
        p.alpha_c = double(col_labels - cfg.m) / double(cfg.m);
        p.beta_c = 0.05;
        p.seed = seed;
        neo_mean += f1_score(clusters_of(neo_cc(inst.X, p).V), truth);

        NeoParams q;
        q.k = 2;
        q.l = 2;
        q.seed = seed;
        mssr_mean += f1_score(clusters_of(neo_cc(inst.X, q).V), truth);
    }
    CHECK(neo_mean / seeds > mssr_mean / seeds);
}

TEST_CASE("spy_side: disjoint exhaustive clustering tiles the axis") {
    const auto a = build_assignment(6, 2, {{0, 1}, {1, 0}, {2, 1}, {3, 0}, {4, 0}, {5, 1}});
    const auto side = spy_side(a);
    CHECK(side.intervals[0] == std::pair<Index, Index>{0, 3});
    CHECK(side.intervals[1] == std::pair<Index, Index>{3, 6});
    // cluster-0 members first (by index), then cluster-1 members
    CHECK(side.order == std::vector<Index>{1, 3, 4, 0, 2, 5});
}

TEST_CASE("spy_side: overlap point sits in cluster 0's tail, shared with cluster 1") {
    // p0 in {0}, p1 in {0,1}, p2 in {1}
    const auto a = build_assignment(3, 2, {{0, 0}, {1, 0}, {1, 1}, {2, 1}});
    const auto side = spy_side(a);
    CHECK(side.order == std::vector<Index>{0, 1, 2});
    CHECK(side.intervals[0] == std::pair<Index, Index>{0, 2});
    CHECK(side.intervals[1] == std::pair<Index, Index>{1, 3});
    // cluster 1's interval overlaps cluster 0's tail position, which holds p1
    CHECK(side.intervals[1].first < side.intervals[0].second);
    CHECK(side.order[static_cast<std::size_t>(side.intervals[1].first)] == 1);
}

TEST_CASE("spy_side: all points outliers") {
    AssignmentMatrix a(4, 2);
    const auto side = spy_side(a);
    CHECK(side.order == std::vector<Index>{0, 1, 2, 3});
    for (const auto& [s, e] : side.intervals) CHECK(s == e);
}

TEST_CASE("spy_side: permutation is a bijection with outliers last") {
    Rng rng(7);
    for (int trial = 0; trial < 15; ++trial) {
        const Index n = 5 + rng.below(15);
        const auto a = oracle::random_assignment(rng, n, 1 + rng.below(4), 0.25, 0.3);
        const auto side = spy_side(a);
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        for (Index p : side.order) {
            REQUIRE(p >= 0);
            REQUIRE(p < n);
            CHECK(!seen[static_cast<std::size_t>(p)]);
            seen[static_cast<std::size_t>(p)] = 1;
        }
        bool outlier_zone = false;
        for (Index pos = 0; pos < n; ++pos) {
            const bool is_out = a.is_outlier(side.order[static_cast<std::size_t>(pos)]);
            if (is_out) outlier_zone = true;
            if (outlier_zone) CHECK(is_out);
        }
    }
}

TEST_CASE("spy_permutation covers both sides of a result") {
    PlantedConfig cfg;
    cfg.n = 20;
    cfg.m = 12;
    cfg.k = 2;
    cfg.l = 2;
    cfg.seed = 4;
    const auto inst = generate_planted(cfg);
    NeoParams p;
    p.k = 2;
    p.l = 2;
    const auto res = neo_cc(inst.X, p);
    const auto layout = spy_permutation(res);
    CHECK(layout.rows.order.size() == 20);
    CHECK(layout.cols.order.size() == 12);
    CHECK(layout.rows.intervals.size() == 2);
    CHECK(layout.cols.intervals.size() == 2);
}
