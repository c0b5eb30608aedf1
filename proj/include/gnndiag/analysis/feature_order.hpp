#pragma once

#include "gnndiag/analysis/clustering.hpp"
#include "gnndiag/graph/dataset.hpp"
#include "gnndiag/metrics/node_metrics.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <string_view>
#include <vector>

namespace gnndiag {

enum class FeatureSort { NodeOrder, Frequency };

inline std::string_view to_string(FeatureSort s) { return s == FeatureSort::NodeOrder ? "node_order" : "frequency"; }

inline std::optional<FeatureSort> parse_feature_sort(std::string_view s) {
    if (s == "node_order") return FeatureSort::NodeOrder;
    if (s == "frequency") return FeatureSort::Frequency;
    return std::nullopt;
}

/// Cosine similarity at or above this marks consecutive rows as similar.
inline constexpr double kSimilarRowThreshold = 0.95;

struct FeatureOrdering {
    std::vector<NodeId> nodes;           // selection, reordered
    std::vector<bool> similar_to_next;   // per position, last is false
    std::vector<std::size_t> dims;       // feature dimensions, display order
    std::vector<std::size_t> dim_counts; // per dimension id: selected nodes with value > 0
    std::vector<std::size_t> dim_support;// per dimension id: of those, P1 equal to the reference
    NodeId reference = 0;
};

inline CondensedDistances cosine_distances(const Dataset& ds, std::span<const NodeId> nodes) {
    const auto& x = ds.features();
    return CondensedDistances::from_function(nodes.size(), [&](std::size_t i, std::size_t j) {
        return std::max(0.0, 1.0 - cosine_similarity(x.row(nodes[i]), x.row(nodes[j])));
    });
}

/// Orders the selected rows by complete-linkage clustering on cosine
/// distance plus optimal leaf ordering, and the feature dimensions either by
/// id or by support rate against the reference node's GNN prediction.
/// Without a reference the first row of the node ordering is used.
inline FeatureOrdering order_features(const Dataset& ds, const NodeMetricsTable& table, std::span<const NodeId> selection,
                                      FeatureSort mode, std::optional<NodeId> reference = std::nullopt) {
    if (selection.empty()) throw Error("feature ordering needs a non-empty selection");
    FeatureOrdering out;
    const auto dist = cosine_distances(ds, selection);
    for (std::size_t pos : optimal_leaf_ordering(complete_linkage(dist), dist)) out.nodes.push_back(selection[pos]);

    const auto& x = ds.features();
    for (std::size_t i = 0; i < out.nodes.size(); ++i)
        out.similar_to_next.push_back(i + 1 < out.nodes.size() &&
                                      cosine_similarity(x.row(out.nodes[i]), x.row(out.nodes[i + 1])) >= kSimilarRowThreshold);

    out.reference = reference.value_or(out.nodes.front());
    if (out.reference >= table.rows.size()) throw Error("reference node out of range");
    const ClassId ref_pred = table.rows[out.reference].pred[0];
    const std::size_t d = ds.feature_dim();
    out.dim_counts.assign(d, 0);
    out.dim_support.assign(d, 0);
    for (NodeId v : selection)
        for (std::size_t c = 0; c < d; ++c)
            if (x(v, static_cast<Eigen::Index>(c)) > 0.0) {
                ++out.dim_counts[c];
                if (table.rows[v].pred[0] == ref_pred) ++out.dim_support[c];
            }

    out.dims.resize(d);
    std::iota(out.dims.begin(), out.dims.end(), std::size_t{0});
    if (mode == FeatureSort::Frequency) {
        // support_a / count_a > support_b / count_b, compared exactly.
        std::stable_sort(out.dims.begin(), out.dims.end(), [&](std::size_t a, std::size_t b) {
            const auto na = out.dim_counts[a], nb = out.dim_counts[b];
            if ((na == 0) != (nb == 0)) return nb == 0;
            if (na == 0) return false;
            const auto lhs = out.dim_support[a] * nb, rhs = out.dim_support[b] * na;
            if (lhs != rhs) return lhs > rhs;
            return na > nb;
        });
    }
    return out;
}

} // namespace gnndiag
