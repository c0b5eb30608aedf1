#pragma once

// Continuous metric -> category binning and Parallel Sets aggregation.

#include "gnndiag/core/error.hpp"
#include "gnndiag/metrics/node_metrics.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace gnndiag {

/// Bins of one continuous metric.  Bin b covers [edges[b], edges[b+1]);
/// the last bin also includes its upper edge.
struct MetricBins {
    std::vector<double> edges;
    std::vector<std::string> names;

    friend bool operator==(const MetricBins&, const MetricBins&) = default;
};

struct BinningSpec {
    std::map<std::string, MetricBins, std::less<>> metrics;

    friend bool operator==(const BinningSpec&, const BinningSpec&) = default;
};

/// Category name of unreachable DIS values.
inline constexpr std::string_view kUnreachable = "unreachable";

inline const std::vector<std::string>& continuous_metrics() {
    static const std::vector<std::string> m = {"conf",   "deg",           "dis",           "closeness",
                                               "cn_label", "cn_label_pred", "cn_pred_label", "cn_pred"};
    return m;
}

inline const std::vector<std::string>& categorical_metrics() {
    static const std::vector<std::string> m = {"gt",       "p1",       "p2",       "p3",
                                               "correct1", "correct2", "correct3", "nearest_dominant",
                                               "topk_dominant"};
    return m;
}

inline MetricBins quartile_bins() {
    return {{0.0, 0.25, 0.5, 0.75, 1.0}, {"[0,0.25)", "[0.25,0.5)", "[0.5,0.75)", "[0.75,1.0]"}};
}

inline BinningSpec default_binning() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    BinningSpec s;
    s.metrics["conf"] = quartile_bins();
    s.metrics["deg"] = {{0, 1, 3, 6, 11, inf}, {"0", "1-2", "3-5", "6-10", ">10"}};
    s.metrics["dis"] = {{0, 1, 2, 3, 5, inf}, {"0", "1", "2", "3-4", ">=5"}};
    for (const char* m : {"cn_label", "cn_label_pred", "cn_pred_label", "cn_pred"}) s.metrics[m] = quartile_bins();
    return s;
}

inline void validate(const BinningSpec& spec) {
    for (const auto& [name, b] : spec.metrics) {
        if (b.edges.size() < 2 || b.names.size() + 1 != b.edges.size())
            throw ValidationError("bins of '" + name + "' need one more edge than names");
        for (std::size_t i = 1; i < b.edges.size(); ++i)
            if (!(b.edges[i] > b.edges[i - 1])) throw ValidationError("bin edges of '" + name + "' must increase");
    }
}

inline nlohmann::json binning_to_json(const BinningSpec& spec) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, b] : spec.metrics) {
        nlohmann::json edges = nlohmann::json::array();
        for (double e : b.edges) {
            if (std::isinf(e)) edges.push_back("inf");
            else edges.push_back(e);
        }
        j[name] = {{"edges", edges}, {"names", b.names}};
    }
    return j;
}

inline BinningSpec binning_from_json(const nlohmann::json& j) {
    BinningSpec spec;
    try {
        for (const auto& [name, v] : j.items()) {
            MetricBins b;
            for (const auto& e : v.at("edges"))
                b.edges.push_back(e.is_string() && e.get<std::string>() == "inf" ? std::numeric_limits<double>::infinity()
                                                                                 : e.get<double>());
            b.names = v.at("names").get<std::vector<std::string>>();
            spec.metrics[name] = std::move(b);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("binning spec: ") + e.what());
    }
    validate(spec);
    return spec;
}

/// Value of a continuous metric; nullopt for an unreachable DIS.
inline std::optional<double> continuous_value(const NodeMetricsRow& r, std::string_view metric) {
    if (metric == "conf") return r.conf;
    if (metric == "deg") return static_cast<double>(r.deg);
    if (metric == "dis") return r.dis ? std::optional<double>(*r.dis) : std::nullopt;
    if (metric == "closeness") return r.closeness;
    if (metric == "cn_label") return r.cn[kLabelConsistency];
    if (metric == "cn_label_pred") return r.cn[kLabelPredictionConsistency];
    if (metric == "cn_pred_label") return r.cn[kPredictionLabelConsistency];
    if (metric == "cn_pred") return r.cn[kPredictionConsistency];
    throw Error("unknown metric '" + std::string(metric) + "'");
}

inline std::string bin_value(const MetricBins& b, double v, std::string_view metric) {
    if (v == b.edges.back() && std::isfinite(v)) return b.names.back();
    for (std::size_t i = 0; i + 1 < b.edges.size(); ++i)
        if (v >= b.edges[i] && v < b.edges[i + 1]) return b.names[i];
    throw ValidationError("value " + std::to_string(v) + " of '" + std::string(metric) + "' is outside the bins");
}

/// Per-metric category lists and per-node category codes.
struct BinnedTable {
    std::vector<std::string> metrics;
    std::vector<std::vector<std::string>> categories;
    std::vector<std::vector<std::uint32_t>> codes;  // codes[metric][row]

    std::size_t row_count() const { return codes.empty() ? 0 : codes.front().size(); }
    std::size_t metric_index(std::string_view m) const {
        for (std::size_t i = 0; i < metrics.size(); ++i)
            if (metrics[i] == m) return i;
        throw Error("unknown axis '" + std::string(m) + "'");
    }
};

/// Categorical metrics plus the continuous ones the binning covers.
inline std::vector<std::string> binnable_metrics(const BinningSpec& spec) {
    std::vector<std::string> m = categorical_metrics();
    for (const auto& c : continuous_metrics())
        if (spec.metrics.contains(c)) m.push_back(c);
    return m;
}

/// Maps each requested metric of every row to a category.  Class-valued
/// metrics use the class names, booleans are "correct"/"wrong", verdicts
/// keep their names, continuous metrics go through their bins.
inline BinnedTable bin_metrics(const NodeMetricsTable& t, const BinningSpec& spec,
                               const std::vector<std::string>& class_names, const std::vector<std::string>& metrics) {
    BinnedTable out;
    const std::size_t classes = t.class_count;
    auto class_name = [&](std::size_t c) { return c < class_names.size() ? class_names[c] : std::to_string(c); };
    for (const auto& m : metrics) {
        std::vector<std::string> cats;
        std::vector<std::uint32_t> codes;
        codes.reserve(t.rows.size());
        const bool is_class = m == "gt" || m == "p1" || m == "p2" || m == "p3";
        const bool is_correct = m == "correct1" || m == "correct2" || m == "correct3";
        const bool is_verdict = m == "nearest_dominant" || m == "topk_dominant";
        if (is_class) {
            for (std::size_t c = 0; c < classes; ++c) cats.push_back(class_name(c));
            for (const auto& r : t.rows) {
                const ClassId v = m == "gt" ? r.gt : r.pred[static_cast<std::size_t>(m[1] - '1')];
                codes.push_back(static_cast<std::uint32_t>(v));
            }
        } else if (is_correct) {
            cats = {"correct", "wrong"};
            for (const auto& r : t.rows) codes.push_back(r.correct[static_cast<std::size_t>(m[7] - '1')] ? 0 : 1);
        } else if (is_verdict) {
            cats = {"True", "False", "NotSure"};
            for (const auto& r : t.rows)
                codes.push_back(static_cast<std::uint32_t>(m == "nearest_dominant" ? r.nearest_dominant : r.topk_dominant));
        } else {
            auto it = spec.metrics.find(m);
            if (it == spec.metrics.end()) throw ValidationError("binning spec does not cover '" + m + "'");
            cats = it->second.names;
            const bool has_unreachable = m == "dis";
            if (has_unreachable) cats.emplace_back(kUnreachable);
            for (const auto& r : t.rows) {
                const auto v = continuous_value(r, m);
                if (!v) {
                    codes.push_back(static_cast<std::uint32_t>(cats.size() - 1));
                    continue;
                }
                const auto name = bin_value(it->second, *v, m);
                codes.push_back(static_cast<std::uint32_t>(
                    std::find(it->second.names.begin(), it->second.names.end(), name) - it->second.names.begin()));
            }
        }
        out.metrics.push_back(m);
        out.categories.push_back(std::move(cats));
        out.codes.push_back(std::move(codes));
    }
    return out;
}

inline BinnedTable bin_metrics(const NodeMetricsTable& t, const BinningSpec& spec,
                               const std::vector<std::string>& class_names) {
    return bin_metrics(t, spec, class_names, binnable_metrics(spec));
}

struct Segment {
    std::string category;
    std::size_t count = 0;
    std::vector<NodeId> nodes;
};

struct AxisSegments {
    std::string metric;
    std::vector<Segment> segments;  // every category, in category order
};

struct Ribbon {
    std::size_t axis = 0;  // connects axis and axis + 1
    std::string from;
    std::string to;
    std::size_t count = 0;
    std::vector<NodeId> nodes;
};

struct ParallelSetsResult {
    std::vector<AxisSegments> axes;
    std::vector<Ribbon> ribbons;  // non-empty ones only
    std::vector<std::string> warnings;
};

inline constexpr std::size_t kParallelSetsAxisLimit = 6;
inline constexpr std::size_t kParallelSetsAxisAdvice = 4;

/// Segments per axis and ribbons between adjacent axes over the selection.
/// Selection entries are row indices (node ids).
inline ParallelSetsResult parallel_sets(const BinnedTable& binned, const std::vector<std::string>& axes,
                                        std::span<const NodeId> selection) {
    if (axes.empty()) throw ValidationError("at least one axis is required");
    if (axes.size() > kParallelSetsAxisLimit)
        throw ValidationError("at most " + std::to_string(kParallelSetsAxisLimit) + " axes are supported");
    ParallelSetsResult out;
    if (axes.size() > kParallelSetsAxisAdvice)
        out.warnings.push_back("more than " + std::to_string(kParallelSetsAxisAdvice) + " axes make the view hard to read");
    std::vector<std::size_t> idx;
    for (const auto& a : axes) idx.push_back(binned.metric_index(a));
    for (NodeId id : selection)
        if (id >= binned.row_count()) throw Error("node " + std::to_string(id) + " out of range");

    for (std::size_t k : idx) {
        AxisSegments ax;
        ax.metric = binned.metrics[k];
        for (const auto& c : binned.categories[k]) ax.segments.push_back({c, 0, {}});
        for (NodeId id : selection) {
            auto& seg = ax.segments[binned.codes[k][id]];
            ++seg.count;
            seg.nodes.push_back(id);
        }
        out.axes.push_back(std::move(ax));
    }
    for (std::size_t a = 0; a + 1 < idx.size(); ++a) {
        const std::size_t k1 = idx[a], k2 = idx[a + 1];
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<NodeId>> groups;
        for (NodeId id : selection) groups[{binned.codes[k1][id], binned.codes[k2][id]}].push_back(id);
        for (auto& [key, nodes] : groups)
            out.ribbons.push_back({a, binned.categories[k1][key.first], binned.categories[k2][key.second], nodes.size(),
                                   std::move(nodes)});
    }
    return out;
}

} // namespace gnndiag
