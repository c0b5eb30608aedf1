#pragma once

#include "gnndiag/analysis/clustering.hpp"
#include "gnndiag/analysis/layout.hpp"
#include "gnndiag/analysis/plane_distance.hpp"
#include "gnndiag/analysis/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

namespace gnndiag {

/// Cluster-level glyph data.
struct ClusterAggregate {
    std::vector<NodeId> members;
    PlanePoint point;
    std::size_t size = 0;
    double radius = 0.0;  // sqrt(size)
};

namespace detail {

inline ClassId majority(const std::vector<std::size_t>& counts) {
    // max_element returns the first maximum, i.e. the lowest class id.
    return static_cast<ClassId>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

} // namespace detail

/// Majority GT and predictions (ties to the lowest class id), arithmetic
/// means of everything continuous.
inline ClusterAggregate aggregate_cluster(const NodeMetricsTable& t, std::span<const NodeId> members) {
    if (members.empty()) throw Error("cannot aggregate an empty cluster");
    const std::size_t classes = t.class_count;
    ClusterAggregate agg;
    agg.members.assign(members.begin(), members.end());
    agg.size = members.size();
    agg.radius = std::sqrt(static_cast<double>(agg.size));

    std::vector<std::size_t> gt(classes, 0);
    std::array<std::vector<std::size_t>, 3> pred;
    for (auto& p : pred) p.assign(classes, 0);
    PlanePoint& m = agg.point;
    m.spd.assign(classes, 0.0);
    m.kfs.assign(classes, 0.0);
    for (NodeId id : members) {
        const PlanePoint p = plane_point(t.rows.at(id), t.max_degree);
        ++gt[static_cast<std::size_t>(p.gt)];
        for (std::size_t j = 0; j < 3; ++j) ++pred[j][static_cast<std::size_t>(p.pred[j])];
        m.conf += p.conf;
        m.norm_deg += p.norm_deg;
        m.closeness += p.closeness;
        for (std::size_t c = 0; c < 4; ++c) m.cn[c] += p.cn[c];
        for (std::size_t c = 0; c < classes; ++c) {
            m.spd[c] += p.spd[c];
            m.kfs[c] += p.kfs[c];
        }
    }
    const double n = static_cast<double>(members.size());
    m.gt = detail::majority(gt);
    for (std::size_t j = 0; j < 3; ++j) m.pred[j] = detail::majority(pred[j]);
    m.conf /= n;
    m.norm_deg /= n;
    m.closeness /= n;
    for (auto& v : m.cn) v /= n;
    for (auto& v : m.spd) v /= n;
    for (auto& v : m.kfs) v /= n;
    return agg;
}

/// t-SNE of plane points under the plane distance.
inline Embedding project(PlaneId plane, std::span<const PlanePoint> points, const TsneParams& params) {
    return tsne(distance_matrix(plane, points), params);
}

enum class ProjectionMode { Auto, Cluster, Detail };

inline std::optional<ProjectionMode> parse_projection_mode(std::string_view s) {
    if (s == "auto") return ProjectionMode::Auto;
    if (s == "cluster") return ProjectionMode::Cluster;
    if (s == "detail") return ProjectionMode::Detail;
    return std::nullopt;
}

struct ProjectionParams {
    TsneParams tsne;
    std::size_t cluster_threshold = 300;  // auto mode clusters above this many members
    std::size_t target_clusters = 50;
    std::size_t overlap_iterations = 500;
    double glyph_scale = 0.04;  // largest glyph radius relative to the layout extent
};

struct ProjectionPlane {
    PlaneId plane = PlaneId::PredictionComparison;
    bool cluster_mode = false;
    std::vector<NodeId> member_ids;
    std::vector<ClusterAggregate> items;  // one per glyph (singletons in detail mode)
    Points2 coords;                       // glyph centers after collision resolution
    std::vector<double> radii;            // glyph radii in layout units
    std::vector<double> kl_history;
};

/// Full projection of a plane: optional clustering, t-SNE of the items,
/// glyph sizing, and collision resolution.
inline ProjectionPlane project_plane(PlaneId plane, const NodeMetricsTable& t, std::span<const NodeId> members,
                                     ProjectionMode mode, const ProjectionParams& params) {
    ProjectionPlane out;
    out.plane = plane;
    out.member_ids.assign(members.begin(), members.end());
    std::sort(out.member_ids.begin(), out.member_ids.end());
    out.member_ids.erase(std::unique(out.member_ids.begin(), out.member_ids.end()), out.member_ids.end());
    const std::size_t n = out.member_ids.size();
    out.cluster_mode = mode == ProjectionMode::Cluster || (mode == ProjectionMode::Auto && n > params.cluster_threshold);
    if (n == 0) {
        out.coords.resize(0, 2);
        return out;
    }

    if (out.cluster_mode) {
        const auto points = plane_points(t, out.member_ids);
        const auto labels = cluster(plane, points, std::min(params.target_clusters, n));
        for (const auto& g : groups_of(labels)) {
            std::vector<NodeId> ids;
            for (std::size_t pos : g) ids.push_back(out.member_ids[pos]);
            out.items.push_back(aggregate_cluster(t, ids));
        }
    } else {
        for (NodeId id : out.member_ids) out.items.push_back(aggregate_cluster(t, std::span<const NodeId>(&id, 1)));
    }

    std::vector<PlanePoint> item_points;
    for (const auto& it : out.items) item_points.push_back(it.point);
    if (item_points.size() == 1) {
        out.coords = Points2::Zero(1, 2);
    } else {
        auto emb = project(plane, item_points, params.tsne);
        out.coords = std::move(emb.coords);
        out.kl_history = std::move(emb.kl_history);
    }

    double extent = 0.0;
    if (out.coords.rows() > 1)
        extent = (out.coords.colwise().maxCoeff() - out.coords.colwise().minCoeff()).maxCoeff();
    if (!(extent > 0.0)) extent = 1.0;
    double max_r = 0.0;
    for (const auto& it : out.items) max_r = std::max(max_r, it.radius);
    const double unit = params.glyph_scale * extent / max_r;
    for (const auto& it : out.items) out.radii.push_back(unit * it.radius);
    out.coords = resolve_overlap(std::move(out.coords), out.radii, params.overlap_iterations);
    return out;
}

} // namespace gnndiag
