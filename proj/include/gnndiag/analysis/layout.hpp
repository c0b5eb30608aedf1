#pragma once

// Glyph collision resolution, force-directed graph layout, and k-hop
// neighborhoods.

#include "gnndiag/core/random.hpp"
#include "gnndiag/graph/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <unordered_map>
#include <vector>

namespace gnndiag {

using Points2 = Eigen::MatrixX2d;

namespace detail {

/// Uniform grid over points for neighbor queries within one cell radius.
class PointGrid {
public:
    PointGrid(const Points2& pts, double cell) : cell_(cell > 0 ? cell : 1.0) {
        for (Eigen::Index i = 0; i < pts.rows(); ++i) cells_[key(cell_of(pts(i, 0)), cell_of(pts(i, 1)))].push_back(i);
    }

    /// Calls fn(j) for every point within the 3x3 block around (x, y).
    template <class Fn>
    void for_near(double x, double y, Fn&& fn) const {
        const auto cx = cell_of(x), cy = cell_of(y);
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = cells_.find(key(cx + dx, cy + dy));
                if (it == cells_.end()) continue;
                for (Eigen::Index j : it->second) fn(j);
            }
    }

private:
    std::int64_t cell_of(double v) const { return static_cast<std::int64_t>(std::floor(v / cell_)); }
    static std::uint64_t key(std::int64_t x, std::int64_t y) {
        return (static_cast<std::uint64_t>(x) * 0x9E3779B97F4A7C15ULL) ^ static_cast<std::uint64_t>(y);
    }

    double cell_;
    std::unordered_map<std::uint64_t, std::vector<Eigen::Index>> cells_;
};

} // namespace detail

/// Tolerance for disc overlap: 0.5% of the larger side of the discs'
/// bounding box.
inline double overlap_epsilon(const Points2& c, std::span<const double> radii) {
    if (c.rows() == 0) return 0.0;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
        const double r = radii[static_cast<std::size_t>(i)];
        x0 = std::min(x0, c(i, 0) - r);
        x1 = std::max(x1, c(i, 0) + r);
        y0 = std::min(y0, c(i, 1) - r);
        y1 = std::max(y1, c(i, 1) + r);
    }
    return 0.005 * std::max(x1 - x0, y1 - y0);
}

/// Largest pairwise overlap r_i + r_j - |c_i - c_j| (0 if none).
inline double max_overlap(const Points2& c, std::span<const double> radii) {
    double rmax = 0.0;
    for (double r : radii) rmax = std::max(rmax, r);
    const detail::PointGrid grid(c, 2.0 * rmax);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < c.rows(); ++i)
        grid.for_near(c(i, 0), c(i, 1), [&](Eigen::Index j) {
            if (j <= i) return;
            const double o = radii[static_cast<std::size_t>(i)] + radii[static_cast<std::size_t>(j)] -
                             (c.row(i) - c.row(j)).norm();
            worst = std::max(worst, o);
        });
    return worst;
}

/// Pushes overlapping discs apart pairwise until no pair overlaps by more
/// than overlap_epsilon or the iteration cap is hit.  Input without such
/// overlap is returned unchanged.
inline Points2 resolve_overlap(Points2 c, std::span<const double> radii, std::size_t iterations = 500) {
    if (static_cast<std::size_t>(c.rows()) != radii.size()) throw Error("one radius per disc is required");
    const double eps = overlap_epsilon(c, radii);
    double rmax = 0.0;
    for (double r : radii) rmax = std::max(rmax, r);
    for (std::size_t it = 0; it < iterations; ++it) {
        if (max_overlap(c, radii) <= eps) break;
        const detail::PointGrid grid(c, 2.0 * rmax);
        for (Eigen::Index i = 0; i < c.rows(); ++i)
            grid.for_near(c(i, 0), c(i, 1), [&](Eigen::Index j) {
                if (j <= i) return;
                Eigen::RowVector2d delta = c.row(j) - c.row(i);
                const double want = radii[static_cast<std::size_t>(i)] + radii[static_cast<std::size_t>(j)];
                double dist = delta.norm();
                if (dist >= want) return;
                if (dist < 1e-12) {
                    // Coincident centers: a fixed direction per pair.
                    const double angle = static_cast<double>(splitmix64(static_cast<std::uint64_t>(i) * 1000003ULL +
                                                                        static_cast<std::uint64_t>(j)) %
                                                             3600) *
                                         std::numbers::pi / 1800.0;
                    delta = Eigen::RowVector2d(std::cos(angle), std::sin(angle));
                    dist = 0.0;
                } else {
                    delta /= dist;
                }
                const double push = 0.5 * (want - dist) * 1.01;
                c.row(i) -= push * delta;
                c.row(j) += push * delta;
            });
    }
    return c;
}

struct LayoutParams {
    std::size_t iterations = 300;
    double node_radius = 0.15;  // collision radius in units of the ideal edge length
};

/// Spring-electrical layout: edges attract (d^2/k), nodes repel (k^2/d)
/// within 2k, overlapping node discs are pushed apart.  Output is centered.
inline Points2 graph_layout(const Dataset& ds, std::uint64_t seed, const LayoutParams& params = {}) {
    const auto n = static_cast<Eigen::Index>(ds.node_count());
    Points2 pos(n, 2);
    if (n == 0) return pos;
    const double k = 1.0;
    const double side = std::sqrt(static_cast<double>(n)) * k;
    Rng rng(seed);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int c = 0; c < 2; ++c) pos(i, c) = uniform(rng, -side / 2, side / 2);

    Points2 disp(n, 2);
    const double t0 = std::max(side / 10.0, 0.1);
    for (std::size_t it = 0; it < params.iterations; ++it) {
        const double temp = t0 * (1.0 - static_cast<double>(it) / static_cast<double>(params.iterations));
        disp.setZero();
        const detail::PointGrid grid(pos, 2.0 * k);
        for (Eigen::Index i = 0; i < n; ++i)
            grid.for_near(pos(i, 0), pos(i, 1), [&](Eigen::Index j) {
                if (j == i) return;
                Eigen::RowVector2d delta = pos.row(i) - pos.row(j);
                double d = delta.norm();
                if (d > 2.0 * k) return;
                if (d < 1e-9) {
                    delta = Eigen::RowVector2d(i < j ? 1e-3 : -1e-3, 0.0);
                    d = 1e-3;
                }
                double f = k * k / d;
                if (d < 2.0 * params.node_radius) f += (2.0 * params.node_radius - d) * 10.0;
                disp.row(i) += delta / d * f;
            });
        for (const auto& e : ds.edges()) {
            const Eigen::RowVector2d delta = pos.row(e.u) - pos.row(e.v);
            const double d = delta.norm();
            if (d < 1e-12) continue;
            const Eigen::RowVector2d f = delta / d * (d * d / k);
            disp.row(e.u) -= f;
            disp.row(e.v) += f;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const double len = disp.row(i).norm();
            if (len > 0) pos.row(i) += disp.row(i) / len * std::min(len, temp);
        }
    }
    pos.rowwise() -= pos.colwise().mean();
    return pos;
}

/// Seeds plus every node within k hops, ascending.
inline std::vector<NodeId> k_hop(const Dataset& ds, std::span<const NodeId> seeds, std::size_t k) {
    std::vector<int> depth(ds.node_count(), -1);
    std::vector<NodeId> frontier;
    for (NodeId s : seeds) {
        if (s >= ds.node_count()) throw Error("node " + std::to_string(s) + " out of range");
        if (depth[s] < 0) {
            depth[s] = 0;
            frontier.push_back(s);
        }
    }
    for (std::size_t d = 1; d <= k; ++d) {
        std::vector<NodeId> next;
        for (NodeId v : frontier)
            for (NodeId w : ds.neighbors(v))
                if (depth[w] < 0) {
                    depth[w] = static_cast<int>(d);
                    next.push_back(w);
                }
        frontier.swap(next);
    }
    std::vector<NodeId> out;
    for (NodeId i = 0; i < ds.node_count(); ++i)
        if (depth[i] >= 0) out.push_back(i);
    return out;
}

} // namespace gnndiag
