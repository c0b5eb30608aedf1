#pragma once

#include "gnndiag/core/error.hpp"
#include "gnndiag/graph/dataset.hpp"
#include "gnndiag/models/train.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace gnndiag {

enum class Verdict { True, False, NotSure };

inline std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::True: return "True";
    case Verdict::False: return "False";
    case Verdict::NotSure: return "NotSure";
    }
    return "NotSure";
}

inline std::optional<Verdict> parse_verdict(std::string_view s) {
    if (s == "True") return Verdict::True;
    if (s == "False") return Verdict::False;
    if (s == "NotSure") return Verdict::NotSure;
    return std::nullopt;
}

/// Components of the center-neighbor consistency vector.
enum CnComponent : std::size_t {
    kLabelConsistency = 0,           // GT_j == GT_i
    kLabelPredictionConsistency = 1, // P1_j == GT_i
    kPredictionLabelConsistency = 2, // GT_j == P1_i
    kPredictionConsistency = 3,      // P1_j == P1_i
};

struct NodeMetricsRow {
    NodeId node = 0;
    ClassId gt = 0;
    std::array<ClassId, 3> pred{};    // GNN, GNNWUF, MLP
    std::array<bool, 3> correct{};
    double conf = 0.0;
    std::size_t deg = 0;
    std::array<double, 4> cn{};
    std::optional<std::uint32_t> dis;  // empty when no training node is reachable
    double closeness = 0.0;
    std::vector<double> spd;
    Verdict nearest_dominant = Verdict::NotSure;
    std::vector<double> kfs;
    Verdict topk_dominant = Verdict::NotSure;
    std::vector<NodeId> similar_train_ids;

    friend bool operator==(const NodeMetricsRow&, const NodeMetricsRow&) = default;
};

struct NodeMetricsTable {
    std::size_t class_count = 0;
    std::size_t max_degree = 0;
    std::size_t k = 5;
    std::vector<NodeMetricsRow> rows;

    friend bool operator==(const NodeMetricsTable&, const NodeMetricsTable&) = default;
};

/// Predictions of the three models for every node.
struct TrioPredictions {
    std::vector<ClassId> gnn;
    std::vector<ClassId> gnnwuf;
    std::vector<ClassId> mlp;
    std::vector<double> confidence;  // GNN probability of its own label

    static TrioPredictions from_bundle(const TrainedBundle& b) {
        return {b.gnn.predictions.labels, b.gnnwuf.predictions.labels, b.mlp.predictions.labels,
                b.gnn.predictions.confidence};
    }
};

inline double closeness_from_distance(std::optional<std::uint32_t> dis) {
    if (!dis) return 0.0;
    return std::max(0.0, 1.0 - static_cast<double>(*dis) * 0.2);
}

/// Fractions of neighbors j with (GT_j = GT_i), (P1_j = GT_i),
/// (GT_j = P1_i), (P1_j = P1_i).  All zero for an isolated node.
inline std::array<double, 4> center_neighbor_consistency(const Dataset& ds, std::span<const ClassId> gnn_pred,
                                                         NodeId node) {
    std::array<double, 4> cn{};
    const auto nbrs = ds.neighbors(node);
    if (nbrs.empty()) return cn;
    const ClassId gt = ds.label(node);
    const ClassId p = gnn_pred[node];
    for (NodeId j : nbrs) {
        cn[kLabelConsistency] += ds.label(j) == gt;
        cn[kLabelPredictionConsistency] += gnn_pred[j] == gt;
        cn[kPredictionLabelConsistency] += ds.label(j) == p;
        cn[kPredictionConsistency] += gnn_pred[j] == p;
    }
    for (auto& v : cn) v /= static_cast<double>(nbrs.size());
    return cn;
}

struct TrainingDistance {
    std::optional<std::uint32_t> dis;
    std::vector<double> spd;
};

/// BFS from `node` (depth 0 is the node itself).  DIS is the first depth
/// holding a training node; SPD is the label distribution over all training
/// nodes at that depth.
inline TrainingDistance distance_to_training(const Dataset& ds, NodeId node) {
    TrainingDistance out;
    out.spd.assign(ds.class_count(), 0.0);
    std::vector<bool> seen(ds.node_count(), false);
    std::vector<NodeId> frontier{node}, next;
    seen[node] = true;
    for (std::uint32_t depth = 0; !frontier.empty(); ++depth) {
        std::size_t hits = 0;
        for (NodeId v : frontier) {
            if (ds.in_train(v)) {
                out.spd[static_cast<std::size_t>(ds.label(v))] += 1.0;
                ++hits;
            }
        }
        if (hits > 0) {
            out.dis = depth;
            for (auto& x : out.spd) x /= static_cast<double>(hits);
            return out;
        }
        next.clear();
        for (NodeId v : frontier)
            for (NodeId w : ds.neighbors(v))
                if (!seen[w]) {
                    seen[w] = true;
                    next.push_back(w);
                }
        frontier.swap(next);
    }
    return out;
}

/// True/False when the distribution has a unique mode equal/unequal to the
/// reference; NotSure on a tied mode or an all-zero distribution.
inline Verdict dominant_consistency(std::span<const double> distribution, ClassId reference) {
    if (distribution.empty()) return Verdict::NotSure;
    const double best = *std::max_element(distribution.begin(), distribution.end());
    if (!(best > 0.0)) return Verdict::NotSure;
    if (std::count(distribution.begin(), distribution.end(), best) > 1) return Verdict::NotSure;
    const auto mode = std::find(distribution.begin(), distribution.end(), best) - distribution.begin();
    return mode == reference ? Verdict::True : Verdict::False;
}

/// Cosine similarity; 0 when either vector is zero.
inline double cosine_similarity(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                                 const Eigen::Ref<const Eigen::RowVectorXd>& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

struct SimilarTraining {
    std::vector<NodeId> ids;
    std::vector<double> kfs;
};

/// Top-k training nodes by feature cosine similarity, excluding the query
/// node; ties by ascending id.  KFS is their label distribution.
inline SimilarTraining topk_similar_training(const Dataset& ds, NodeId node, std::size_t k) {
    if (k == 0) throw Error("k must be at least 1");
    const auto& train = ds.train_ids();
    const auto& x = ds.features();
    std::vector<std::pair<double, NodeId>> scored;
    scored.reserve(train.size());
    for (NodeId t : train) {
        if (t == node) continue;
        scored.emplace_back(cosine_similarity(x.row(node), x.row(t)), t);
    }
    const std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                      [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
    SimilarTraining out;
    out.kfs.assign(ds.class_count(), 0.0);
    for (std::size_t r = 0; r < take; ++r) {
        out.ids.push_back(scored[r].second);
        out.kfs[static_cast<std::size_t>(ds.label(scored[r].second))] += 1.0;
    }
    if (take > 0)
        for (auto& v : out.kfs) v /= static_cast<double>(take);
    return out;
}

/// One complete metrics row.
inline NodeMetricsRow compute_row(const Dataset& ds, const TrioPredictions& pred, NodeId i, std::size_t k) {
    NodeMetricsRow r;
    r.node = i;
    r.gt = ds.label(i);
    r.pred = {pred.gnn[i], pred.gnnwuf[i], pred.mlp[i]};
    for (std::size_t m = 0; m < 3; ++m) r.correct[m] = r.pred[m] == r.gt;
    r.conf = pred.confidence[i];
    r.deg = ds.degree(i);
    r.cn = center_neighbor_consistency(ds, pred.gnn, i);
    auto td = distance_to_training(ds, i);
    r.dis = td.dis;
    r.closeness = closeness_from_distance(td.dis);
    r.spd = std::move(td.spd);
    r.nearest_dominant = dominant_consistency(r.spd, r.gt);
    auto sim = topk_similar_training(ds, i, k);
    r.kfs = std::move(sim.kfs);
    r.similar_train_ids = std::move(sim.ids);
    r.topk_dominant = dominant_consistency(r.kfs, r.gt);
    return r;
}

inline NodeMetricsTable compute_table(const Dataset& ds, const TrioPredictions& pred, std::size_t k = 5) {
    for (const auto* v : {&pred.gnn, &pred.gnnwuf, &pred.mlp})
        if (v->size() != ds.node_count())
            throw DimensionError("predictions cover " + std::to_string(v->size()) + " nodes, dataset has " +
                                 std::to_string(ds.node_count()));
    if (pred.confidence.size() != ds.node_count()) throw DimensionError("confidence vector has the wrong length");
    NodeMetricsTable t;
    t.class_count = ds.class_count();
    t.max_degree = ds.max_degree();
    t.k = k;
    t.rows.reserve(ds.node_count());
    for (NodeId i = 0; i < ds.node_count(); ++i) t.rows.push_back(compute_row(ds, pred, i, k));
    return t;
}

inline NodeMetricsTable compute_table(const Dataset& ds, const TrainedBundle& bundle, std::size_t k = 5) {
    return compute_table(ds, TrioPredictions::from_bundle(bundle), k);
}

} // namespace gnndiag
