#pragma once

// Brute-force references for the analysis layer.

#include "gnndiag/analysis/clustering.hpp"
#include "gnndiag/analysis/layout.hpp"
#include "gnndiag/core/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace gnndiag::testing {

struct NaiveLinkage {
    std::vector<std::size_t> labels;
    std::vector<double> heights;  // merge heights in order
};

/// Complete linkage by recomputing every cluster-pair maximum from the
/// original distances at every step.
inline NaiveLinkage naive_complete_linkage(const CondensedDistances& d, std::size_t target) {
    const std::size_t n = d.size();
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < n; ++i) clusters.push_back({i});
    NaiveLinkage out;
    while (clusters.size() > target) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t ba = 0, bb = 0;
        for (std::size_t a = 0; a < clusters.size(); ++a)
            for (std::size_t b = 0; b < clusters.size(); ++b) {
                if (a == b) continue;
                const auto ma = *std::min_element(clusters[a].begin(), clusters[a].end());
                const auto mb = *std::min_element(clusters[b].begin(), clusters[b].end());
                if (ma > mb) continue;
                double link = 0.0;
                for (auto x : clusters[a])
                    for (auto y : clusters[b]) link = std::max(link, d(x, y));
                const auto cur_ma = *std::min_element(clusters[ba].begin(), clusters[ba].end());
                const auto cur_mb = *std::min_element(clusters[bb].begin(), clusters[bb].end());
                if (link < best || (link == best && std::pair(ma, mb) < std::pair(cur_ma, cur_mb))) {
                    best = link;
                    ba = a;
                    bb = b;
                }
            }
        out.heights.push_back(best);
        clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
    }
    std::sort(clusters.begin(), clusters.end(), [](const auto& x, const auto& y) {
        return *std::min_element(x.begin(), x.end()) < *std::min_element(y.begin(), y.end());
    });
    out.labels.assign(n, 0);
    for (std::size_t c = 0; c < clusters.size(); ++c)
        for (auto x : clusters[c]) out.labels[x] = c;
    return out;
}

/// Every leaf ordering reachable by flipping internal nodes.
inline std::vector<std::vector<std::size_t>> all_flip_orderings(const Dendrogram& dg, std::size_t v) {
    if (v < dg.leaves) return {{v}};
    const auto left = all_flip_orderings(dg, dg.merges[v - dg.leaves].a);
    const auto right = all_flip_orderings(dg, dg.merges[v - dg.leaves].b);
    std::vector<std::vector<std::size_t>> out;
    for (const auto& l : left)
        for (const auto& r : right) {
            auto lr = l;
            lr.insert(lr.end(), r.begin(), r.end());
            auto rl = r;
            rl.insert(rl.end(), l.begin(), l.end());
            out.push_back(std::move(lr));
            out.push_back(std::move(rl));
        }
    return out;
}

inline double exhaustive_min_ordering_cost(const Dendrogram& dg, const CondensedDistances& d) {
    const std::size_t root = dg.leaves == 1 ? 0 : 2 * dg.leaves - 2;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : all_flip_orderings(dg, root)) best = std::min(best, ordering_cost(d, o));
    return best;
}

/// True when the leaves of every dendrogram node are contiguous in `order`.
inline bool consistent_with_dendrogram(const Dendrogram& dg, const std::vector<std::size_t>& order) {
    const std::size_t n = dg.leaves;
    std::vector<std::size_t> pos(n);
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    std::vector<std::vector<std::size_t>> leaves(2 * n);
    for (std::size_t i = 0; i < n; ++i) leaves[i] = {i};
    for (std::size_t t = 0; t + 1 < n; ++t) {
        auto& l = leaves[n + t];
        l = leaves[dg.merges[t].a];
        l.insert(l.end(), leaves[dg.merges[t].b].begin(), leaves[dg.merges[t].b].end());
        std::size_t lo = n, hi = 0;
        for (auto x : l) {
            lo = std::min(lo, pos[x]);
            hi = std::max(hi, pos[x]);
        }
        if (hi - lo + 1 != l.size()) return false;
    }
    return true;
}

inline CondensedDistances random_distances(Rng& rng, std::size_t n, bool with_ties = false) {
    return CondensedDistances::from_function(n, [&](std::size_t, std::size_t) {
        return with_ties ? static_cast<double>(1 + uniform_index(rng, 5)) : uniform(rng, 0.0, 1.0);
    });
}

inline double silhouette(const Eigen::MatrixX2d& pts, const std::vector<std::size_t>& labels) {
    const auto n = pts.rows();
    std::size_t k = 0;
    for (auto l : labels) k = std::max(k, l + 1);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<double> sum(k, 0.0);
        std::vector<std::size_t> cnt(k, 0);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            sum[labels[static_cast<std::size_t>(j)]] += (pts.row(i) - pts.row(j)).norm();
            ++cnt[labels[static_cast<std::size_t>(j)]];
        }
        const std::size_t own = labels[static_cast<std::size_t>(i)];
        if (cnt[own] == 0) continue;
        const double a = sum[own] / static_cast<double>(cnt[own]);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c)
            if (c != own && cnt[c] > 0) b = std::min(b, sum[c] / static_cast<double>(cnt[c]));
        if (std::isinf(b)) continue;
        total += (b - a) / std::max(a, b);
    }
    return total / static_cast<double>(n);
}

/// 2n items: within-block distances in [0.05, 0.3], across in [1, 1.3].
inline CondensedDistances two_block_distances(Rng& rng, std::size_t per_block) {
    return CondensedDistances::from_function(2 * per_block, [&](std::size_t i, std::size_t j) {
        const bool same = (i < per_block) == (j < per_block);
        return same ? uniform(rng, 0.05, 0.3) : uniform(rng, 1.0, 1.3);
    });
}

/// Pairs whose discs overlap by more than eps, by scanning every pair.
inline std::size_t overlapping_pairs(const Eigen::MatrixX2d& c, const std::vector<double>& r, double eps) {
    std::size_t bad = 0;
    for (Eigen::Index i = 0; i < c.rows(); ++i)
        for (Eigen::Index j = i + 1; j < c.rows(); ++j)
            if ((c.row(i) - c.row(j)).norm() < r[static_cast<std::size_t>(i)] + r[static_cast<std::size_t>(j)] - eps)
                ++bad;
    return bad;
}

inline PlanePoint random_plane_point(Rng& rng, std::size_t classes) {
    PlanePoint p;
    p.gt = static_cast<ClassId>(uniform_index(rng, classes));
    for (auto& x : p.pred) x = static_cast<ClassId>(uniform_index(rng, classes));
    p.conf = uniform(rng, 1.0 / static_cast<double>(classes), 1.0);
    p.norm_deg = uniform01(rng);
    for (auto& x : p.cn) x = uniform_index(rng, 4) == 0 ? 0.0 : uniform01(rng);
    p.closeness = 0.2 * static_cast<double>(uniform_index(rng, 6));
    auto dist = [&](bool allow_zero) {
        std::vector<double> v(classes, 0.0);
        if (allow_zero && uniform_index(rng, 5) == 0) return v;
        double s = 0.0;
        for (auto& x : v) s += (x = uniform01(rng));
        for (auto& x : v) x /= s;
        return v;
    };
    p.spd = dist(true);
    if (std::all_of(p.spd.begin(), p.spd.end(), [](double v) { return v == 0.0; })) p.closeness = 0.0;
    p.kfs = dist(false);
    return p;
}

} // namespace gnndiag::testing
