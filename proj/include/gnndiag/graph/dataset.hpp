#pragma once

#include "gnndiag/core/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gnndiag {

using NodeId = std::uint32_t;
using ClassId = std::int32_t;
using FeatureMatrix = Eigen::MatrixXd;

/// Undirected edge stored with u < v.
struct Edge {
    NodeId u = 0;
    NodeId v = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

enum class Subset { All, Train, Validation, Test };

inline std::string_view to_string(Subset s) {
    switch (s) {
    case Subset::All: return "all";
    case Subset::Train: return "train";
    case Subset::Validation: return "validation";
    case Subset::Test: return "test";
    }
    return "all";
}

inline std::optional<Subset> parse_subset(std::string_view s) {
    if (s == "all") return Subset::All;
    if (s == "train") return Subset::Train;
    if (s == "validation" || s == "val") return Subset::Validation;
    if (s == "test") return Subset::Test;
    return std::nullopt;
}

/// Raw pieces of a dataset before validation.  Edges may be given in
/// either orientation; validation canonicalises them to u < v.
struct DatasetParts {
    std::size_t node_count = 0;
    std::vector<std::pair<std::int64_t, std::int64_t>> edges;
    FeatureMatrix features;
    std::vector<std::int64_t> labels;
    std::size_t class_count = 0;
    std::vector<std::int64_t> train;
    std::vector<std::int64_t> validation;
    std::vector<std::int64_t> test;
    std::vector<std::string> class_names;
    std::vector<std::string> feature_names;
};

/// Immutable attributed graph with ground-truth labels and split masks.
///
/// Invariants (checked by create()):
///  - edge endpoints in [0, N), no self loops, no duplicates;
///  - every feature entry in [0, 1];
///  - labels in [0, C), every class used at least once;
///  - train/validation/test disjoint, train non-empty.
class Dataset {
public:
    static Dataset create(DatasetParts parts);

    std::size_t node_count() const noexcept { return node_count_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(features_.cols()); }
    std::size_t class_count() const noexcept { return class_count_; }

    std::span<const Edge> edges() const noexcept { return edges_; }
    const FeatureMatrix& features() const noexcept { return features_; }
    std::span<const ClassId> labels() const noexcept { return labels_; }
    ClassId label(NodeId i) const { return labels_[i]; }

    std::span<const NodeId> neighbors(NodeId i) const {
        return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
    }
    std::size_t degree(NodeId i) const { return offsets_[i + 1] - offsets_[i]; }
    std::size_t max_degree() const noexcept { return max_degree_; }

    bool in_train(NodeId i) const { return membership_[i] == kTrain; }
    bool in_validation(NodeId i) const { return membership_[i] == kValidation; }
    bool in_test(NodeId i) const { return membership_[i] == kTest; }
    bool in_subset(NodeId i, Subset s) const;

    const std::vector<NodeId>& train_ids() const noexcept { return train_ids_; }

    const std::vector<std::string>& class_names() const noexcept { return class_names_; }
    const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }

    friend bool operator==(const Dataset& a, const Dataset& b) {
        return a.node_count_ == b.node_count_ && a.class_count_ == b.class_count_ && a.edges_ == b.edges_ &&
               a.labels_ == b.labels_ && a.membership_ == b.membership_ && a.features_ == b.features_ &&
               a.class_names_ == b.class_names_ && a.feature_names_ == b.feature_names_;
    }

private:
    static constexpr std::uint8_t kNone = 0;
    static constexpr std::uint8_t kTrain = 1;
    static constexpr std::uint8_t kValidation = 2;
    static constexpr std::uint8_t kTest = 3;

    Dataset() = default;
    void build_adjacency();

    std::size_t node_count_ = 0;
    std::size_t class_count_ = 0;
    std::vector<Edge> edges_;
    FeatureMatrix features_;
    std::vector<ClassId> labels_;
    std::vector<std::uint8_t> membership_;
    std::vector<NodeId> train_ids_;
    std::vector<std::string> class_names_;
    std::vector<std::string> feature_names_;

    std::vector<std::size_t> offsets_;
    std::vector<NodeId> adjacency_;
    std::size_t max_degree_ = 0;
};

/// Node ids of a subset, ascending.
inline std::vector<NodeId> subset_mask(const Dataset& ds, Subset which) {
    std::vector<NodeId> ids;
    for (NodeId i = 0; i < ds.node_count(); ++i) {
        if (ds.in_subset(i, which)) ids.push_back(i);
    }
    return ids;
}

// ---------------------------------------------------------------------------

inline bool Dataset::in_subset(NodeId i, Subset s) const {
    switch (s) {
    case Subset::All: return true;
    case Subset::Train: return membership_[i] == kTrain;
    case Subset::Validation: return membership_[i] == kValidation;
    case Subset::Test: return membership_[i] == kTest;
    }
    return false;
}

inline Dataset Dataset::create(DatasetParts parts) {
    using std::to_string;
    Dataset ds;
    const auto n = parts.node_count;
    if (n == 0) throw ValidationError("dataset has no nodes");
    ds.node_count_ = n;

    if (static_cast<std::size_t>(parts.features.rows()) != n)
        throw ValidationError("feature matrix has " + to_string(parts.features.rows()) + " rows, expected " +
                              to_string(n));
    for (Eigen::Index r = 0; r < parts.features.rows(); ++r) {
        for (Eigen::Index c = 0; c < parts.features.cols(); ++c) {
            const double f = parts.features(r, c);
            if (!(f >= 0.0 && f <= 1.0))
                throw ValidationError("feature outside [0,1] at node " + to_string(r) + ", dim " + to_string(c));
        }
    }
    ds.features_ = std::move(parts.features);

    ds.edges_.reserve(parts.edges.size());
    for (std::size_t e = 0; e < parts.edges.size(); ++e) {
        auto [a, b] = parts.edges[e];
        if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n || static_cast<std::size_t>(b) >= n)
            throw ValidationError("edge " + to_string(e) + ": endpoint out of range (" + to_string(a) + ", " +
                                  to_string(b) + ") with " + to_string(n) + " nodes");
        if (a == b) throw ValidationError("edge " + to_string(e) + ": self loop on node " + to_string(a));
        if (a > b) std::swap(a, b);
        ds.edges_.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b)});
    }
    std::sort(ds.edges_.begin(), ds.edges_.end());
    if (auto dup = std::adjacent_find(ds.edges_.begin(), ds.edges_.end()); dup != ds.edges_.end())
        throw ValidationError("duplicate edge (" + to_string(dup->u) + ", " + to_string(dup->v) + ")");

    if (parts.class_count == 0) throw ValidationError("class count must be positive");
    if (parts.labels.size() != n)
        throw ValidationError("expected " + to_string(n) + " labels, got " + to_string(parts.labels.size()));
    ds.class_count_ = parts.class_count;
    std::vector<bool> seen(parts.class_count, false);
    ds.labels_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto y = parts.labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= parts.class_count)
            throw ValidationError("unknown class id " + to_string(y) + " at node " + to_string(i));
        seen[static_cast<std::size_t>(y)] = true;
        ds.labels_.push_back(static_cast<ClassId>(y));
    }
    for (std::size_t c = 0; c < seen.size(); ++c) {
        if (!seen[c]) throw ValidationError("class " + to_string(c) + " has no nodes");
    }

    ds.membership_.assign(n, kNone);
    auto assign = [&](const std::vector<std::int64_t>& ids, std::uint8_t tag, const char* name) {
        for (auto id : ids) {
            if (id < 0 || static_cast<std::size_t>(id) >= n)
                throw ValidationError(std::string(name) + " mask: node id " + to_string(id) + " out of range");
            if (ds.membership_[static_cast<std::size_t>(id)] != kNone)
                throw ValidationError(std::string(name) + " mask: node " + to_string(id) +
                                      " already belongs to another mask");
            ds.membership_[static_cast<std::size_t>(id)] = tag;
        }
    };
    assign(parts.train, kTrain, "train");
    assign(parts.validation, kValidation, "validation");
    assign(parts.test, kTest, "test");
    for (NodeId i = 0; i < n; ++i) {
        if (ds.membership_[i] == kTrain) ds.train_ids_.push_back(i);
    }
    if (ds.train_ids_.empty()) throw ValidationError("train mask is empty");

    if (!parts.class_names.empty() && parts.class_names.size() != parts.class_count)
        throw ValidationError("class_names has " + to_string(parts.class_names.size()) + " entries, expected " +
                              to_string(parts.class_count));
    if (!parts.feature_names.empty() && parts.feature_names.size() != ds.feature_dim())
        throw ValidationError("feature_names has " + to_string(parts.feature_names.size()) + " entries, expected " +
                              to_string(ds.feature_dim()));
    ds.class_names_ = std::move(parts.class_names);
    ds.feature_names_ = std::move(parts.feature_names);

    ds.build_adjacency();
    return ds;
}

inline void Dataset::build_adjacency() {
    std::vector<std::size_t> deg(node_count_, 0);
    for (const auto& e : edges_) {
        ++deg[e.u];
        ++deg[e.v];
    }
    offsets_.assign(node_count_ + 1, 0);
    for (std::size_t i = 0; i < node_count_; ++i) offsets_[i + 1] = offsets_[i] + deg[i];
    adjacency_.resize(offsets_.back());
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (const auto& e : edges_) {
        adjacency_[cursor[e.u]++] = e.v;
        adjacency_[cursor[e.v]++] = e.u;
    }
    // Edges are sorted, so each neighbor list comes out ascending except for
    // the interleaving of lower and higher ids; sort to make it exact.
    for (std::size_t i = 0; i < node_count_; ++i) {
        std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
                  adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]));
    }
    max_degree_ = deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
}

} // namespace gnndiag
