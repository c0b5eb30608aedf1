#pragma once

#include "gnndiag/analysis/plane_distance.hpp"
#include "gnndiag/core/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <tuple>
#include <vector>

namespace gnndiag {

/// One agglomeration step.  Ids below the leaf count are leaves; merge t
/// creates id leaves + t.
struct Merge {
    std::size_t a = 0;
    std::size_t b = 0;
    double height = 0.0;
    std::size_t size = 0;

    friend bool operator==(const Merge&, const Merge&) = default;
};

struct Dendrogram {
    std::size_t leaves = 0;
    std::vector<Merge> merges;

    friend bool operator==(const Dendrogram&, const Dendrogram&) = default;
};

/// Greedy complete-linkage agglomeration.  Each step merges the closest
/// pair of clusters; equal distances go to the pair with the smallest
/// (min index of first, min index of second).
inline Dendrogram complete_linkage(CondensedDistances d) {
    const std::size_t n = d.size();
    if (n == 0) throw Error("cannot cluster an empty set");
    Dendrogram dg;
    dg.leaves = n;
    if (n == 1) return dg;

    // Clusters live in the slot of their smallest member.
    std::vector<bool> active(n, true);
    std::vector<std::size_t> id(n), size(n, 1);
    std::iota(id.begin(), id.end(), 0);
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> nn(n, n);
    std::vector<double> nnd(n, kInf);

    auto refresh = [&](std::size_t i) {
        nn[i] = n;
        nnd[i] = kInf;
        for (std::size_t j = i + 1; j < n; ++j)
            if (active[j] && d(i, j) < nnd[i]) {
                nnd[i] = d(i, j);
                nn[i] = j;
            }
    };
    for (std::size_t i = 0; i + 1 < n; ++i) refresh(i);

    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t a = n;
        for (std::size_t i = 0; i < n; ++i)
            if (active[i] && nn[i] < n && (a == n || nnd[i] < nnd[a])) a = i;
        const std::size_t b = nn[a];
        const double h = nnd[a];

        dg.merges.push_back({std::min(id[a], id[b]), std::max(id[a], id[b]), h, size[a] + size[b]});
        active[b] = false;
        size[a] += size[b];
        id[a] = n + step;
        for (std::size_t k = 0; k < n; ++k)
            if (active[k] && k != a) d.at(a, k) = std::max(d(a, k), d(b, k));

        refresh(a);
        for (std::size_t i = 0; i < b; ++i) {
            if (!active[i] || i == a) continue;
            if (nn[i] == a || nn[i] == b) refresh(i);
        }
    }
    return dg;
}

/// Cluster index per leaf after keeping the first leaves - k merges.
/// Clusters are numbered in order of their smallest leaf.
inline std::vector<std::size_t> cut_tree(const Dendrogram& dg, std::size_t k) {
    const std::size_t n = dg.leaves;
    if (k < 1 || k > n) throw Error("target cluster count must be in [1, " + std::to_string(n) + "]");
    std::vector<std::size_t> parent(2 * n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t t = 0; t < n - k; ++t) {
        parent[find(dg.merges[t].a)] = n + t;
        parent[find(dg.merges[t].b)] = n + t;
    }
    std::vector<std::size_t> label(n), root_label(2 * n, n);
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = find(i);
        if (root_label[r] == n) root_label[r] = next++;
        label[i] = root_label[r];
    }
    return label;
}

/// Members (as positions) of each cluster of a cut.
inline std::vector<std::vector<std::size_t>> groups_of(const std::vector<std::size_t>& labels) {
    std::vector<std::vector<std::size_t>> g;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= g.size()) g.resize(labels[i] + 1);
        g[labels[i]].push_back(i);
    }
    return g;
}

/// Complete-linkage partition of plane points into `target` clusters.
inline std::vector<std::size_t> cluster(PlaneId plane, std::span<const PlanePoint> points, std::size_t target) {
    if (points.empty()) throw Error("cannot cluster an empty set");
    return cut_tree(complete_linkage(distance_matrix(plane, points)), target);
}

/// Leaves in plain dendrogram order (first child before second).
inline std::vector<std::size_t> dendrogram_leaf_order(const Dendrogram& dg) {
    const std::size_t n = dg.leaves;
    if (n == 0) return {};
    std::vector<std::size_t> out;
    std::vector<std::size_t> stack{n == 1 ? 0 : 2 * n - 2};
    while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        if (v < n) {
            out.push_back(v);
            continue;
        }
        stack.push_back(dg.merges[v - n].b);
        stack.push_back(dg.merges[v - n].a);
    }
    return out;
}

inline double ordering_cost(const CondensedDistances& d, std::span<const std::size_t> order) {
    double s = 0.0;
    for (std::size_t i = 1; i < order.size(); ++i) s += d(order[i - 1], order[i]);
    return s;
}

/// Beyond this many leaves optimal_leaf_ordering returns the plain
/// dendrogram order (the exact search is cubic in time).
inline constexpr std::size_t kOptimalLeafOrderingLimit = 1000;

/// Dendrogram-consistent leaf order minimizing the summed distance between
/// consecutive leaves.
inline std::vector<std::size_t> optimal_leaf_ordering(const Dendrogram& dg, const CondensedDistances& d) {
    const std::size_t n = dg.leaves;
    if (n <= 2 || n > kOptimalLeafOrderingLimit) return dendrogram_leaf_order(dg);

    // Leaves below every node, in plain order.
    std::vector<std::vector<std::size_t>> leaves(2 * n - 1);
    for (std::size_t i = 0; i < n; ++i) leaves[i] = {i};
    for (std::size_t t = 0; t < n - 1; ++t) {
        leaves[n + t] = leaves[dg.merges[t].a];
        leaves[n + t].insert(leaves[n + t].end(), leaves[dg.merges[t].b].begin(), leaves[dg.merges[t].b].end());
    }

    // m(i, j): best cost of the subtree at lca(i, j) ordered from i to j.
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    auto M = [&](std::size_t i, std::size_t j) -> double& {
        return m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    };
    // Valid endpoints of an ordering of node v starting at leaf i.
    auto far_ends = [&](std::size_t v, std::size_t i) -> const std::vector<std::size_t>& {
        if (v < n) return leaves[v];
        const auto& m0 = dg.merges[v - n];
        const auto& la = leaves[m0.a];
        return std::find(la.begin(), la.end(), i) != la.end() ? leaves[m0.b] : leaves[m0.a];
    };
    // T(i, q) = min over ends h of l (from i) of M(i, h) + d(h, q).
    auto inner = [&](const std::vector<std::size_t>& ends, std::size_t i, std::size_t q, std::size_t* arg) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t h : ends) {
            const double c = M(i, h) + d(h, q);
            if (c < best) {
                best = c;
                if (arg) *arg = h;
            }
        }
        return best;
    };

    std::vector<double> tq(n);
    for (std::size_t t = 0; t < n - 1; ++t) {
        const std::size_t l = dg.merges[t].a, r = dg.merges[t].b;
        for (std::size_t i : leaves[l]) {
            const auto& ends = far_ends(l, i);
            for (std::size_t q : leaves[r]) tq[q] = inner(ends, i, q, nullptr);
            for (std::size_t j : leaves[r]) {
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t q : far_ends(r, j)) best = std::min(best, tq[q] + M(q, j));
                M(i, j) = M(j, i) = best;
            }
        }
    }

    const std::size_t root = 2 * n - 2;
    const auto& top = dg.merges[root - n];
    std::size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i : leaves[top.a])
        for (std::size_t j : leaves[top.b])
            if (M(i, j) < best) {
                best = M(i, j);
                bi = i;
                bj = j;
            }

    // Rebuild by repeating the minimizations in the orientation they were
    // computed in (first child to second child).
    std::vector<std::size_t> out;
    auto contains = [&](std::size_t v, std::size_t leaf) {
        const auto& lv = leaves[v];
        return std::find(lv.begin(), lv.end(), leaf) != lv.end();
    };
    auto emit = [&](auto&& self, std::size_t v, std::size_t i, std::size_t j) -> void {
        if (v < n) {
            out.push_back(v);
            return;
        }
        const auto& mv = dg.merges[v - n];
        if (!contains(mv.a, i)) {
            const std::size_t start = out.size();
            self(self, v, j, i);
            std::reverse(out.begin() + static_cast<std::ptrdiff_t>(start), out.end());
            return;
        }
        const double target = M(i, j);
        const auto& ends = far_ends(mv.a, i);
        for (std::size_t q : far_ends(mv.b, j)) {
            std::size_t h = 0;
            const double tq_value = inner(ends, i, q, &h);
            if (tq_value + M(q, j) == target) {
                self(self, mv.a, i, h);
                self(self, mv.b, q, j);
                return;
            }
        }
        throw Error("leaf ordering reconstruction failed");
    };
    emit(emit, root, bi, bj);
    return out;
}

} // namespace gnndiag
