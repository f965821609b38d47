#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "neocc/core.hpp"
#include "neocc/random.hpp"
#include "neocc/solver.hpp"

// Evaluation utilities: overlapping-cluster F1, a planted co-cluster
// generator for property-based acceptance, and the spy-plot permutation.

namespace neocc {

/// Per-point label sets; an empty set marks an outlier, two or more mark
/// overlap. Identifiers form a contiguous 0-based range.
struct GroundTruth {
    Index n_points = 0;
    std::vector<std::vector<Index>> labels;

    Index n_clusters() const {
        Index mx = -1;
        for (const auto& ls : labels)
            for (Index c : ls) mx = std::max(mx, c);
        return mx + 1;
    }

    /// Member lists of the nonempty clusters.
    std::vector<std::vector<Index>> clusters() const {
        std::vector<std::vector<Index>> out(static_cast<std::size_t>(n_clusters()));
        for (Index p = 0; p < n_points; ++p)
            for (Index c : labels[static_cast<std::size_t>(p)])
                out[static_cast<std::size_t>(c)].push_back(p);
        std::erase_if(out, [](const auto& members) { return members.empty(); });
        return out;
    }
};

/// Nonempty clusters of an assignment matrix, as member lists.
inline std::vector<std::vector<Index>> clusters_of(const AssignmentMatrix& a) {
    std::vector<std::vector<Index>> out;
    for (Index c = 0; c < a.clusters(); ++c) {
        auto members = a.cluster_members(c);
        if (!members.empty()) out.push_back(std::move(members));
    }
    return out;
}

// ---------------------------------------------------------------------------
// F1

namespace detail {

inline double pair_f1(const std::vector<Index>& a, const std::vector<Index>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t ia = 0, ib = 0, both = 0;
    while (ia < a.size() && ib < b.size()) {
        if (a[ia] == b[ib]) {
            ++both;
            ++ia;
            ++ib;
        } else if (a[ia] < b[ib]) {
            ++ia;
        } else {
            ++ib;
        }
    }
    return 2.0 * static_cast<double>(both) / static_cast<double>(a.size() + b.size());
}

inline std::vector<std::vector<Index>> sorted_clusters(std::vector<std::vector<Index>> cs) {
    for (auto& c : cs) {
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
    }
    return cs;
}

inline double mean_best_match(const std::vector<std::vector<Index>>& from,
                              const std::vector<std::vector<Index>>& to) {
    double total = 0.0;
    for (const auto& f : from) {
        double best = 0.0;
        for (const auto& t : to) best = std::max(best, pair_f1(f, t));
        total += best;
    }
    return total / static_cast<double>(from.size());
}

}  // namespace detail

/// Symmetric average best-match F1:
///   0.5 * [ mean over truth clusters of the best pairwise F1 against any
///   predicted cluster + the same with roles swapped ],
/// with pairF1(A, B) = 2|A n B| / (|A| + |B|).
inline double f1_score(const std::vector<std::vector<Index>>& predicted,
                       const std::vector<std::vector<Index>>& truth) {
    if (predicted.empty() || truth.empty())
        throw EmptyClustering("f1_score: both sides need at least one cluster");
    const auto p = detail::sorted_clusters(predicted);
    const auto t = detail::sorted_clusters(truth);
    return 0.5 * (detail::mean_best_match(t, p) + detail::mean_best_match(p, t));
}

// ---------------------------------------------------------------------------
// Planted instances

struct PlantedConfig {
    Index n = 0, m = 0;
    Index k = 1, l = 1;
    double overlap_frac_r = 0.0, overlap_frac_c = 0.0;
    double outlier_frac_r = 0.0, outlier_frac_c = 0.0;
    double signal = 1.0;
    double noise_sd = 0.0;
    std::uint64_t seed = 0;
};

struct PlantedInstance {
    DataMatrix X;
    GroundTruth rows;
    GroundTruth cols;
};

namespace detail {

inline GroundTruth plant_side(Index n, Index k, double overlap_frac, double outlier_frac,
                              Rng& rng) {
    const Index n_out = round_half_up(outlier_frac * static_cast<double>(n));
    const Index n_ovl = round_half_up(overlap_frac * static_cast<double>(n));
    if (n_out + n_ovl > n)
        throw ValidationError("generate_planted: overlap + outlier fractions exceed the side");
    if (n - n_out < k)
        throw ValidationError("generate_planted: not enough clustered points for k clusters");

    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    rng.shuffle(perm);

    GroundTruth truth;
    truth.n_points = n;
    truth.labels.assign(static_cast<std::size_t>(n), {});
    Index rank = 0;
    for (Index i = n_out; i < n; ++i, ++rank) {
        const Index p = perm[static_cast<std::size_t>(i)];
        const Index primary = rank % k;
        truth.labels[static_cast<std::size_t>(p)].push_back(primary);
        if (i - n_out < n_ovl && k > 1)
            truth.labels[static_cast<std::size_t>(p)].push_back((primary + 1) % k);
        std::sort(truth.labels[static_cast<std::size_t>(p)].begin(),
                  truth.labels[static_cast<std::size_t>(p)].end());
    }
    return truth;
}

inline bool share_label(const std::vector<Index>& a, const std::vector<Index>& b) {
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
        if (a[ia] == b[ib]) return true;
        if (a[ia] < b[ib])
            ++ia;
        else
            ++ib;
    }
    return false;
}

}  // namespace detail

/// Block-structured matrix: entries whose row and column share a planted
/// cluster id draw signal + noise, everything else pure noise. Outlier
/// rows/columns carry no labels and hence only noise.
inline PlantedInstance generate_planted(const PlantedConfig& cfg) {
    if (cfg.n < 1 || cfg.m < 1) throw ValidationError("generate_planted: positive dimensions");
    if (cfg.k < 1 || cfg.l < 1) throw ValidationError("generate_planted: positive cluster counts");
    for (double f : {cfg.overlap_frac_r, cfg.overlap_frac_c, cfg.outlier_frac_r, cfg.outlier_frac_c})
        if (!(f >= 0.0 && f < 1.0))
            throw ValidationError("generate_planted: fractions must lie in [0, 1)");

    Rng rng(cfg.seed);
    PlantedInstance inst;
    inst.rows = detail::plant_side(cfg.n, cfg.k, cfg.overlap_frac_r, cfg.outlier_frac_r, rng);
    inst.cols = detail::plant_side(cfg.m, cfg.l, cfg.overlap_frac_c, cfg.outlier_frac_c, rng);

    Matrixd x(cfg.n, cfg.m);
    for (Index i = 0; i < cfg.n; ++i) {
        const auto& ri = inst.rows.labels[static_cast<std::size_t>(i)];
        for (Index j = 0; j < cfg.m; ++j) {
            const auto& cj = inst.cols.labels[static_cast<std::size_t>(j)];
            double val = cfg.noise_sd > 0.0 ? cfg.noise_sd * rng.gaussian() : 0.0;
            if (detail::share_label(ri, cj)) val += cfg.signal;
            x(i, j) = val;
        }
    }
    inst.X = DataMatrix::dense(std::move(x));
    return inst;
}

// ---------------------------------------------------------------------------
// Spy-plot permutation

/// One side of the spy layout: `order` is the permutation (original index
/// at each display position), `intervals` gives each cluster's [start, end)
/// span of display positions; intervals of overlapping clusters intersect,
/// empty clusters get [0, 0).
struct SpySide {
    std::vector<Index> order;
    std::vector<std::pair<Index, Index>> intervals;
};

struct SpyLayout {
    SpySide rows;
    SpySide cols;
};

/// Points sort by their sorted membership tuple (lexicographically), so
/// each cluster's members stay contiguous where possible and overlap
/// points land at the tail of the earlier cluster's block, adjacent to the
/// next one. Outliers come last, by index.
inline SpySide spy_side(const AssignmentMatrix& a) {
    const Index n = a.points();
    std::vector<std::vector<Index>> labels(static_cast<std::size_t>(n));
    for (Index p = 0; p < n; ++p) labels[static_cast<std::size_t>(p)] = a.point_clusters(p);

    SpySide side;
    side.order.resize(static_cast<std::size_t>(n));
    std::iota(side.order.begin(), side.order.end(), Index{0});
    std::sort(side.order.begin(), side.order.end(), [&](Index x, Index y) {
        const auto& lx = labels[static_cast<std::size_t>(x)];
        const auto& ly = labels[static_cast<std::size_t>(y)];
        const bool ox = lx.empty(), oy = ly.empty();
        if (ox != oy) return oy;  // outliers last
        if (lx != ly) return std::lexicographical_compare(lx.begin(), lx.end(), ly.begin(), ly.end());
        return x < y;
    });

    std::vector<Index> position(static_cast<std::size_t>(n));
    for (Index pos = 0; pos < n; ++pos)
        position[static_cast<std::size_t>(side.order[static_cast<std::size_t>(pos)])] = pos;

    side.intervals.assign(static_cast<std::size_t>(a.clusters()), {0, 0});
    for (Index c = 0; c < a.clusters(); ++c) {
        Index lo = n, hi = -1;
        for (Index p : a.cluster_members(c)) {
            lo = std::min(lo, position[static_cast<std::size_t>(p)]);
            hi = std::max(hi, position[static_cast<std::size_t>(p)]);
        }
        if (hi >= 0) side.intervals[static_cast<std::size_t>(c)] = {lo, hi + 1};
    }
    return side;
}

inline SpyLayout spy_permutation(const CoClusterResult& result) {
    return {spy_side(result.U), spy_side(result.V)};
}

}  // namespace neocc
