#pragma once

// JSON wire format of the /api/* responses.

#include "gnndiag/analysis/binning.hpp"
#include "gnndiag/analysis/feature_order.hpp"
#include "gnndiag/analysis/projection.hpp"
#include "gnndiag/metrics/node_metrics.hpp"
#include "gnndiag/models/train.hpp"

#include <nlohmann/json.hpp>

namespace gnndiag {

using Json = nlohmann::json;

inline Json row_to_json(const NodeMetricsRow& r) {
    Json j;
    j["node"] = r.node;
    j["gt"] = r.gt;
    j["p1"] = r.pred[0];
    j["p2"] = r.pred[1];
    j["p3"] = r.pred[2];
    j["correct1"] = r.correct[0];
    j["correct2"] = r.correct[1];
    j["correct3"] = r.correct[2];
    j["conf"] = r.conf;
    j["deg"] = r.deg;
    j["cn_label"] = r.cn[kLabelConsistency];
    j["cn_label_pred"] = r.cn[kLabelPredictionConsistency];
    j["cn_pred_label"] = r.cn[kPredictionLabelConsistency];
    j["cn_pred"] = r.cn[kPredictionConsistency];
    j["dis"] = r.dis ? Json(*r.dis) : Json(nullptr);
    j["closeness"] = r.closeness;
    j["spd"] = r.spd;
    j["nearest_dominant"] = to_string(r.nearest_dominant);
    j["kfs"] = r.kfs;
    j["topk_dominant"] = to_string(r.topk_dominant);
    j["similar_train_ids"] = r.similar_train_ids;
    return j;
}

inline NodeMetricsRow row_from_json(const Json& j) {
    NodeMetricsRow r;
    try {
        r.node = j.at("node").get<NodeId>();
        r.gt = j.at("gt").get<ClassId>();
        for (std::size_t i = 0; i < 3; ++i) {
            r.pred[i] = j.at("p" + std::to_string(i + 1)).get<ClassId>();
            r.correct[i] = j.at("correct" + std::to_string(i + 1)).get<bool>();
        }
        r.conf = j.at("conf").get<double>();
        r.deg = j.at("deg").get<std::size_t>();
        r.cn[kLabelConsistency] = j.at("cn_label").get<double>();
        r.cn[kLabelPredictionConsistency] = j.at("cn_label_pred").get<double>();
        r.cn[kPredictionLabelConsistency] = j.at("cn_pred_label").get<double>();
        r.cn[kPredictionConsistency] = j.at("cn_pred").get<double>();
        if (!j.at("dis").is_null()) r.dis = j.at("dis").get<std::uint32_t>();
        r.closeness = j.at("closeness").get<double>();
        r.spd = j.at("spd").get<std::vector<double>>();
        r.kfs = j.at("kfs").get<std::vector<double>>();
        const auto nd = parse_verdict(j.at("nearest_dominant").get<std::string>());
        const auto td = parse_verdict(j.at("topk_dominant").get<std::string>());
        if (!nd || !td) throw ParseError("row: unknown verdict");
        r.nearest_dominant = *nd;
        r.topk_dominant = *td;
        r.similar_train_ids = j.at("similar_train_ids").get<std::vector<NodeId>>();
    } catch (const Json::exception& e) {
        throw ParseError(std::string("row: ") + e.what());
    }
    return r;
}

inline Json accuracy_to_json(const Accuracy& a) {
    return {{"train", a.train}, {"validation", a.validation}, {"test", a.test}, {"all", a.all}};
}

inline Json parallel_sets_to_json(const ParallelSetsResult& p) {
    Json axes = Json::array();
    for (const auto& a : p.axes) {
        Json segs = Json::array();
        for (const auto& s : a.segments) segs.push_back({{"category", s.category}, {"count", s.count}, {"nodes", s.nodes}});
        axes.push_back({{"metric", a.metric}, {"segments", segs}});
    }
    Json ribbons = Json::array();
    for (const auto& r : p.ribbons)
        ribbons.push_back({{"axis", r.axis}, {"from", r.from}, {"to", r.to}, {"count", r.count}, {"nodes", r.nodes}});
    return {{"axes", axes}, {"ribbons", ribbons}, {"warnings", p.warnings}};
}

inline Json plane_point_to_json(const PlanePoint& p) {
    return {{"gt", p.gt},
            {"p1", p.pred[0]},
            {"p2", p.pred[1]},
            {"p3", p.pred[2]},
            {"conf", p.conf},
            {"norm_deg", p.norm_deg},
            {"cn", p.cn},
            {"closeness", p.closeness},
            {"spd", p.spd},
            {"kfs", p.kfs}};
}

/// Glyph list of a projection.  Item ids are given by the caller.
inline Json projection_to_json(const ProjectionPlane& pp, const std::vector<std::string>& item_ids) {
    Json items = Json::array();
    for (std::size_t i = 0; i < pp.items.size(); ++i) {
        const auto ei = static_cast<Eigen::Index>(i);
        items.push_back({{"id", item_ids[i]},
                         {"x", pp.coords(ei, 0)},
                         {"y", pp.coords(ei, 1)},
                         {"r", pp.radii[i]},
                         {"size", pp.items[i].size},
                         {"members", pp.items[i].members},
                         {"glyph", plane_point_to_json(pp.items[i].point)}});
    }
    return {{"plane", to_string(pp.plane)},
            {"mode", pp.cluster_mode ? "cluster" : "detail"},
            {"members", pp.member_ids},
            {"items", items},
            {"kl", pp.kl_history.empty() ? Json(nullptr) : Json(pp.kl_history.back())}};
}

inline Json layout_to_json(const Dataset& ds, const NodeMetricsTable& t, const Points2& pos) {
    Json nodes = Json::array();
    for (NodeId i = 0; i < ds.node_count(); ++i) {
        const auto& r = t.rows[i];
        const auto ei = static_cast<Eigen::Index>(i);
        nodes.push_back({{"id", i},
                         {"x", pos(ei, 0)},
                         {"y", pos(ei, 1)},
                         {"gt", r.gt},
                         {"p1", r.pred[0]},
                         {"p2", r.pred[1]},
                         {"p3", r.pred[2]},
                         {"subset", ds.in_train(i) ? "train" : ds.in_validation(i) ? "validation" : ds.in_test(i) ? "test" : "none"}});
    }
    Json edges = Json::array();
    for (const auto& e : ds.edges()) edges.push_back({e.u, e.v});
    return {{"nodes", nodes}, {"edges", edges}};
}

inline Json feature_row(const Dataset& ds, NodeId v, std::span<const std::size_t> dims) {
    Json row = Json::array();
    for (std::size_t c : dims) row.push_back(ds.features()(v, static_cast<Eigen::Index>(c)));
    return row;
}

inline Json feature_row(const Dataset& ds, NodeId v) {
    std::vector<std::size_t> dims(ds.feature_dim());
    std::iota(dims.begin(), dims.end(), std::size_t{0});
    return feature_row(ds, v, dims);
}

} // namespace gnndiag
