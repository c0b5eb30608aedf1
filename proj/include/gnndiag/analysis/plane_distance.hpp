#pragma once

#include "gnndiag/core/error.hpp"
#include "gnndiag/metrics/node_metrics.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace gnndiag {

enum class PlaneId { PredictionComparison, SurroundingConsistency, TrainStructureInfluence, TrainFeatureInfluence };

inline constexpr std::array<PlaneId, 4> kAllPlanes = {PlaneId::PredictionComparison, PlaneId::SurroundingConsistency,
                                                      PlaneId::TrainStructureInfluence, PlaneId::TrainFeatureInfluence};

inline std::string_view to_string(PlaneId p) {
    switch (p) {
    case PlaneId::PredictionComparison: return "PredictionComparison";
    case PlaneId::SurroundingConsistency: return "SurroundingConsistency";
    case PlaneId::TrainStructureInfluence: return "TrainStructureInfluence";
    case PlaneId::TrainFeatureInfluence: return "TrainFeatureInfluence";
    }
    return "";
}

inline std::optional<PlaneId> parse_plane(std::string_view s) {
    for (PlaneId p : kAllPlanes)
        if (to_string(p) == s) return p;
    return std::nullopt;
}

/// The metric values a plane distance looks at.  Built from one node row or
/// aggregated over a cluster.
struct PlanePoint {
    ClassId gt = 0;
    std::array<ClassId, 3> pred{};
    double conf = 0.0;
    double norm_deg = 0.0;
    std::array<double, 4> cn{};
    double closeness = 0.0;
    std::vector<double> spd;
    std::vector<double> kfs;

    friend bool operator==(const PlanePoint&, const PlanePoint&) = default;
};

inline PlanePoint plane_point(const NodeMetricsRow& r, std::size_t max_degree) {
    if (max_degree == 0) max_degree = 1;
    return {r.gt, r.pred, r.conf, static_cast<double>(r.deg) / static_cast<double>(max_degree),
            r.cn, r.closeness, r.spd, r.kfs};
}

namespace detail {

inline double mismatch(ClassId a, ClassId b) { return a != b ? 1.0 : 0.0; }

inline double squared_diff(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("distribution lengths differ between rows");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

} // namespace detail

/// Squared plane distance.  Categorical terms count 1 on mismatch.
inline double plane_distance_squared(PlaneId plane, const PlanePoint& a, const PlanePoint& b) {
    using detail::mismatch;
    switch (plane) {
    case PlaneId::PredictionComparison: {
        double s = mismatch(a.gt, b.gt);
        for (std::size_t j = 0; j < 3; ++j) s += mismatch(a.pred[j], b.pred[j]);
        return s + (a.conf - b.conf) * (a.conf - b.conf);
    }
    case PlaneId::SurroundingConsistency:
        return (a.norm_deg - b.norm_deg) * (a.norm_deg - b.norm_deg) + mismatch(a.gt, b.gt) +
               detail::squared_diff(a.cn, b.cn);
    case PlaneId::TrainStructureInfluence:
        return mismatch(a.pred[0], b.pred[0]) + detail::squared_diff(a.spd, b.spd) +
               (a.closeness - b.closeness) * (a.closeness - b.closeness);
    case PlaneId::TrainFeatureInfluence:
        return mismatch(a.pred[0], b.pred[0]) + detail::squared_diff(a.kfs, b.kfs);
    }
    return 0.0;
}

inline double plane_distance(PlaneId plane, const PlanePoint& a, const PlanePoint& b) {
    return std::sqrt(plane_distance_squared(plane, a, b));
}

inline double plane_distance(PlaneId plane, const NodeMetricsRow& a, const NodeMetricsRow& b, std::size_t max_degree) {
    if (max_degree == 0) throw Error("max_degree must be at least 1");
    return plane_distance(plane, plane_point(a, max_degree), plane_point(b, max_degree));
}

/// Upper bound of each plane distance.  Train structure influence reaches 2:
/// indicator 1, SPD difference 2, closeness difference 1.
inline double plane_distance_bound(PlaneId plane) {
    switch (plane) {
    case PlaneId::PredictionComparison: return std::sqrt(5.0);
    case PlaneId::SurroundingConsistency: return std::sqrt(6.0);
    case PlaneId::TrainStructureInfluence: return 2.0;
    case PlaneId::TrainFeatureInfluence: return std::sqrt(3.0);
    }
    return 0.0;
}

/// Upper triangle of a symmetric distance matrix, row-major, no diagonal.
class CondensedDistances {
public:
    CondensedDistances() = default;
    explicit CondensedDistances(std::size_t n) : n_(n), d_(n < 2 ? 0 : n * (n - 1) / 2, 0.0) {}

    template <class Fn>
    static CondensedDistances from_function(std::size_t n, Fn&& fn) {
        CondensedDistances c(n);
        std::size_t k = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) c.d_[k++] = fn(i, j);
        return c;
    }

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const {
        if (i == j) return 0.0;
        return d_[index(i, j)];
    }
    double& at(std::size_t i, std::size_t j) { return d_[index(i, j)]; }
    std::span<const double> values() const noexcept { return d_; }

private:
    std::size_t index(std::size_t i, std::size_t j) const {
        if (i > j) std::swap(i, j);
        return n_ * i - i * (i + 1) / 2 + (j - i - 1);
    }

    std::size_t n_ = 0;
    std::vector<double> d_;
};

inline CondensedDistances distance_matrix(PlaneId plane, std::span<const PlanePoint> points) {
    return CondensedDistances::from_function(points.size(), [&](std::size_t i, std::size_t j) {
        return plane_distance(plane, points[i], points[j]);
    });
}

inline std::vector<PlanePoint> plane_points(const NodeMetricsTable& t, std::span<const NodeId> members) {
    std::vector<PlanePoint> out;
    out.reserve(members.size());
    for (NodeId id : members) {
        if (id >= t.rows.size()) throw Error("node " + std::to_string(id) + " is not in the table");
        out.push_back(plane_point(t.rows[id], t.max_degree));
    }
    return out;
}

} // namespace gnndiag
