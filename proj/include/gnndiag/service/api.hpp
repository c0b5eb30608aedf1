#pragma once

// Request routing for the /api/* endpoints, independent of the transport.
// Api::handle is safe to call from many threads.

#include "gnndiag/metrics/metrics_csv.hpp"
#include "gnndiag/service/snapshot.hpp"
#include "gnndiag/service/wire.hpp"

#include <httplib.h>

#include <charconv>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

namespace gnndiag {

struct ApiRequest {
    std::string method = "GET";
    std::string path;
    httplib::Params query;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    std::string body;
};

/// Maps to an HTTP status with a {"error": {code, message}} body.
class ApiError : public Error {
public:
    ApiError(int status, std::string code, const std::string& message)
        : Error(message), status_(status), code_(std::move(code)) {}
    int status() const noexcept { return status_; }
    const std::string& code() const noexcept { return code_; }

private:
    int status_;
    std::string code_;
};

struct Selection {
    std::string token;
    std::vector<NodeId> node_ids;  // ascending, unique
    std::string provenance;
};

inline const std::vector<std::string>& selection_provenances() {
    static const std::vector<std::string> p = {"parallel_sets_segment", "parallel_sets_ribbon", "lasso", "node_click",
                                               "subset_filter"};
    return p;
}

inline const std::vector<std::string>& default_parallel_sets_axes() {
    static const std::vector<std::string> a = {"gt", "correct1", "nearest_dominant", "topk_dominant"};
    return a;
}

/// Content token of a selection: equal contents give equal tokens.
inline std::string selection_token(std::span<const NodeId> ids, std::string_view provenance) {
    std::string text(provenance);
    for (NodeId id : ids) text += ',' + std::to_string(id);
    return "sel-" + hex64(fnv1a(text));
}

namespace detail {

inline ApiError bad_request(const std::string& msg) { return {400, "bad_request", msg}; }
inline ApiError not_found(const std::string& msg) { return {404, "not_found", msg}; }

template <class T>
T parse_unsigned(std::string_view s, std::string_view what) {
    T v{};
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || end != s.data() + s.size())
        throw bad_request("invalid " + std::string(what) + " '" + std::string(s) + "'");
    return v;
}

template <class T>
std::vector<T> parse_unsigned_list(std::string_view s, std::string_view what) {
    std::vector<T> out;
    if (s.empty()) return out;
    for (auto part : split(s, ',')) out.push_back(parse_unsigned<T>(part, what));
    return out;
}

inline std::optional<std::string> param(const httplib::Params& q, const std::string& key) {
    auto it = q.find(key);
    if (it == q.end()) return std::nullopt;
    return it->second;
}

inline std::vector<std::string> path_parts(std::string_view path) {
    std::vector<std::string> parts;
    for (auto p : split(path, '/'))
        if (!p.empty()) parts.emplace_back(p);
    return parts;
}

inline std::string error_body(const std::string& code, const std::string& message) {
    return Json{{"error", {{"code", code}, {"message", message}}}}.dump();
}

} // namespace detail

class Api {
public:
    explicit Api(std::shared_ptr<const Snapshot> snapshot, ProjectionParams params = {})
        : snap_(std::move(snapshot)), params_(std::move(params)) {
        params_.tsne.seed = derive_seed(snap_->seed, "projection");
        for (Subset s : {Subset::All, Subset::Train, Subset::Validation, Subset::Test}) {
            auto sel = std::make_shared<Selection>();
            sel->token = std::string(to_string(s));
            sel->node_ids = subset_mask(snap_->dataset, s);
            sel->provenance = "subset_filter";
            selections_.emplace(sel->token, std::move(sel));
        }
    }

    const Snapshot& snapshot() const noexcept { return *snap_; }

    /// Projection settings with the "projection" sub-seed applied.
    const ProjectionParams& projection_params() const noexcept { return params_; }

    ApiResponse handle(const ApiRequest& req) {
        try {
            return {200, route(req).dump()};
        } catch (const ApiError& e) {
            return {e.status(), detail::error_body(e.code(), e.what())};
        } catch (const Error& e) {
            return {400, detail::error_body("bad_request", e.what())};
        }
    }

    /// Convenience for "path?query" targets.
    ApiResponse get(std::string_view target) {
        ApiRequest req;
        const auto q = target.find('?');
        req.path = std::string(target.substr(0, q));
        if (q != std::string_view::npos) httplib::detail::parse_query_text(std::string(target.substr(q + 1)), req.query);
        return handle(req);
    }

    ApiResponse post(std::string path, std::string body) {
        return handle({"POST", std::move(path), {}, std::move(body)});
    }

    /// Registers a selection and returns its token.  Ids are deduplicated
    /// and sorted; an out-of-range id is a 400.
    std::string create_selection(std::vector<NodeId> ids, const std::string& provenance) {
        const auto& known = selection_provenances();
        if (std::find(known.begin(), known.end(), provenance) == known.end())
            throw detail::bad_request("unknown provenance '" + provenance + "'");
        for (NodeId id : ids)
            if (id >= snap_->dataset.node_count()) throw detail::bad_request("node " + std::to_string(id) + " out of range");
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        auto sel = std::make_shared<Selection>(Selection{selection_token(ids, provenance), std::move(ids), provenance});
        const std::string token = sel->token;
        std::unique_lock lock(sel_mutex_);
        selections_.emplace(token, std::move(sel));  // first write wins; contents are equal anyway
        return token;
    }

    std::shared_ptr<const Selection> selection(const std::string& token) const {
        std::shared_lock lock(sel_mutex_);
        auto it = selections_.find(token);
        if (it == selections_.end()) throw detail::not_found("unknown selection '" + token + "'");
        return it->second;
    }

    /// Cached projection of a selection.
    std::shared_ptr<const ProjectionPlane> projection(PlaneId plane, const std::string& token, ProjectionMode mode) {
        const auto sel = selection(token);
        const bool cluster_mode = mode == ProjectionMode::Cluster ||
                                  (mode == ProjectionMode::Auto && sel->node_ids.size() > params_.cluster_threshold);
        const std::string key = std::string(to_string(plane)) + "|" + token + "|" + (cluster_mode ? "c" : "d");
        std::shared_future<std::shared_ptr<const ProjectionPlane>> fut;
        std::promise<std::shared_ptr<const ProjectionPlane>> promise;
        bool owner = false;
        {
            std::lock_guard lock(proj_mutex_);
            auto it = projections_.find(key);
            if (it == projections_.end()) {
                fut = promise.get_future().share();
                projections_.emplace(key, fut);
                owner = true;
            } else {
                fut = it->second;
            }
        }
        if (owner) {
            try {
                promise.set_value(std::make_shared<const ProjectionPlane>(
                    project_plane(plane, snap_->table, sel->node_ids,
                                  cluster_mode ? ProjectionMode::Cluster : ProjectionMode::Detail, params_)));
            } catch (...) {
                promise.set_exception(std::current_exception());
            }
        }
        return fut.get();
    }

    static std::vector<std::string> item_ids(const ProjectionPlane& pp, const std::string& token) {
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < pp.items.size(); ++i)
            ids.push_back(pp.cluster_mode ? std::string(to_string(pp.plane)) + "-" + token + "-" + std::to_string(i)
                                          : std::to_string(pp.items[i].members.front()));
        return ids;
    }

private:
    Json route(const ApiRequest& req) {
        const auto parts = detail::path_parts(req.path);
        if (parts.size() < 2 || parts[0] != "api") throw detail::not_found("no such endpoint " + req.path);
        const std::string& ep = parts[1];
        const bool is_get = req.method == "GET";
        auto require_get = [&] {
            if (!is_get) throw ApiError(405, "method_not_allowed", req.method + " not allowed on " + req.path);
        };

        if (ep == "selection") {
            if (parts.size() == 2) {
                if (req.method != "POST") throw ApiError(405, "method_not_allowed", "use POST to create a selection");
                return post_selection(req.body);
            }
            require_get();
            if (parts.size() != 3) throw detail::not_found("no such endpoint " + req.path);
            const auto sel = selection(parts[2]);
            return {{"token", sel->token}, {"provenance", sel->provenance}, {"node_ids", sel->node_ids}};
        }
        if (ep == "cluster" && parts.size() == 4 && parts[3] == "members") {
            require_get();
            return cluster_members(parts[2]);
        }
        if (ep == "node" && parts.size() == 3) {
            require_get();
            return node(parts[2]);
        }
        if (parts.size() != 2) throw detail::not_found("no such endpoint " + req.path);
        const auto& q = req.query;
        if (ep == "meta") return require_get(), meta();
        if (ep == "metrics") return require_get(), metrics(q);
        if (ep == "parallel-sets") return require_get(), parallel_sets_ep(q);
        if (ep == "projection") return require_get(), projection_ep(q);
        if (ep == "layout") return require_get(), layout_to_json(snap_->dataset, snap_->table, snap_->layout);
        if (ep == "khop") return require_get(), khop(q);
        if (ep == "features") return require_get(), features(q);
        throw detail::not_found("no such endpoint " + req.path);
    }

    Json meta() const {
        const auto& ds = snap_->dataset;
        Json planes = Json::array();
        for (PlaneId p : kAllPlanes) planes.push_back(to_string(p));
        return {{"N", ds.node_count()},
                {"C", ds.class_count()},
                {"d", ds.feature_dim()},
                {"edges", ds.edge_count()},
                {"class_names", ds.class_names()},
                {"architecture", to_string(snap_->architecture)},
                {"accuracies",
                 {{"gnn", accuracy_to_json(snap_->bundle.gnn.accuracy)},
                  {"gnnwuf", accuracy_to_json(snap_->bundle.gnnwuf.accuracy)},
                  {"mlp", accuracy_to_json(snap_->bundle.mlp.accuracy)}}},
                {"version", snap_->version},
                {"seed", snap_->seed},
                {"k", snap_->table.k},
                {"subsets",
                 {{"all", ds.node_count()},
                  {"train", subset_mask(ds, Subset::Train).size()},
                  {"validation", subset_mask(ds, Subset::Validation).size()},
                  {"test", subset_mask(ds, Subset::Test).size()}}},
                {"binning", binning_to_json(snap_->binning)},
                {"axes", snap_->binned.metrics},
                {"default_axes", default_parallel_sets_axes()},
                {"planes", planes}};
    }

    Json metrics(const httplib::Params& q) const {
        const std::string name = detail::param(q, "subset").value_or("all");
        const auto subset = parse_subset(name);
        if (!subset) throw detail::bad_request("unknown subset '" + name + "'");
        Json rows = Json::array();
        for (NodeId id : subset_mask(snap_->dataset, *subset)) rows.push_back(row_to_json(snap_->table.rows[id]));
        return {{"subset", to_string(*subset)}, {"count", rows.size()}, {"rows", rows}};
    }

    Json post_selection(const std::string& body) {
        Json j;
        try {
            j = Json::parse(body);
        } catch (const Json::parse_error& e) {
            throw detail::bad_request(std::string("selection body is not JSON: ") + e.what());
        }
        if (!j.is_object() || !j.contains("node_ids") || !j["node_ids"].is_array())
            throw detail::bad_request("selection body needs a node_ids array");
        std::vector<NodeId> ids;
        for (const auto& v : j["node_ids"]) {
            if (!v.is_number_integer()) throw detail::bad_request("node ids must be integers");
            const auto id = v.get<std::int64_t>();
            if (id < 0 || static_cast<std::uint64_t>(id) >= snap_->dataset.node_count())
                throw detail::bad_request("node " + std::to_string(id) + " out of range");
            ids.push_back(static_cast<NodeId>(id));
        }
        if (!j.contains("provenance") || !j["provenance"].is_string())
            throw detail::bad_request("selection body needs a provenance string");
        const std::string token = create_selection(std::move(ids), j["provenance"].get<std::string>());
        const auto sel = selection(token);
        return {{"token", token}, {"size", sel->node_ids.size()}, {"provenance", sel->provenance}};
    }

    std::shared_ptr<const Selection> selection_param(const httplib::Params& q) const {
        return selection(detail::param(q, "selection").value_or("all"));
    }

    Json parallel_sets_ep(const httplib::Params& q) const {
        std::vector<std::string> axes;
        if (auto a = detail::param(q, "axes"); a && !a->empty()) {
            for (auto part : detail::split(*a, ',')) axes.emplace_back(part);
        } else {
            axes = default_parallel_sets_axes();
        }
        const auto& known = snap_->binned.metrics;
        for (const auto& a : axes)
            if (std::find(known.begin(), known.end(), a) == known.end()) throw detail::bad_request("unknown axis '" + a + "'");
        const auto sel = selection_param(q);
        Json j = parallel_sets_to_json(parallel_sets(snap_->binned, axes, sel->node_ids));
        j["selection"] = sel->token;
        j["total"] = sel->node_ids.size();
        return j;
    }

    Json projection_ep(const httplib::Params& q) {
        const std::string plane_name = detail::param(q, "plane").value_or("");
        const auto plane = parse_plane(plane_name);
        if (!plane) throw detail::bad_request("unknown plane '" + plane_name + "'");
        const std::string mode_name = detail::param(q, "mode").value_or("auto");
        const auto mode = parse_projection_mode(mode_name);
        if (!mode) throw detail::bad_request("unknown mode '" + mode_name + "'");
        const auto sel = selection_param(q);
        const auto pp = projection(*plane, sel->token, *mode);
        Json j = projection_to_json(*pp, item_ids(*pp, sel->token));
        j["selection"] = sel->token;
        return j;
    }

    Json cluster_members(const std::string& cid) {
        const auto first = cid.find('-'), last = cid.rfind('-');
        if (first == std::string::npos || first == last) throw detail::not_found("unknown cluster '" + cid + "'");
        const auto plane = parse_plane(std::string_view(cid).substr(0, first));
        if (!plane) throw detail::not_found("unknown cluster '" + cid + "'");
        const std::string token = cid.substr(first + 1, last - first - 1);
        std::size_t index = 0;
        try {
            index = detail::parse_unsigned<std::size_t>(std::string_view(cid).substr(last + 1), "cluster index");
        } catch (const ApiError&) {
            throw detail::not_found("unknown cluster '" + cid + "'");
        }
        const auto pp = projection(*plane, token, ProjectionMode::Cluster);
        if (index >= pp->items.size()) throw detail::not_found("unknown cluster '" + cid + "'");
        const auto& item = pp->items[index];
        return {{"id", cid}, {"plane", to_string(*plane)}, {"selection", token}, {"size", item.size}, {"members", item.members}};
    }

    Json khop(const httplib::Params& q) const {
        const auto seeds = detail::parse_unsigned_list<NodeId>(detail::param(q, "seeds").value_or(""), "seed id");
        const auto k = detail::parse_unsigned<std::size_t>(detail::param(q, "k").value_or("1"), "k");
        if (k != 1 && k != 2) throw detail::bad_request("k must be 1 or 2");
        for (NodeId s : seeds)
            if (s >= snap_->dataset.node_count()) throw detail::not_found("node " + std::to_string(s) + " not found");
        return {{"seeds", seeds}, {"k", k}, {"nodes", k_hop(snap_->dataset, seeds, k)}};
    }

    Json features(const httplib::Params& q) const {
        const auto& ds = snap_->dataset;
        const std::string sort_name = detail::param(q, "sort").value_or("node_order");
        const auto sort = parse_feature_sort(sort_name);
        if (!sort) throw detail::bad_request("unknown sort '" + sort_name + "'");
        const auto sel = selection_param(q);
        std::optional<NodeId> reference;
        if (auto r = detail::param(q, "reference")) {
            reference = detail::parse_unsigned<NodeId>(*r, "reference");
            if (*reference >= ds.node_count()) throw detail::not_found("node " + *r + " not found");
        }
        std::size_t lo = 0, hi = ds.feature_dim();
        if (auto b = detail::param(q, "brush")) {
            const auto range = detail::parse_unsigned_list<std::size_t>(*b, "brush bound");
            if (range.size() != 2 || range[0] >= range[1] || range[1] > ds.feature_dim())
                throw detail::bad_request("brush must be lo,hi with lo < hi <= " + std::to_string(ds.feature_dim()));
            lo = range[0];
            hi = range[1];
        }
        Json j{{"selection", sel->token}, {"sort", to_string(*sort)}, {"brush", {lo, hi}}};
        if (sel->node_ids.empty()) {
            for (const char* key : {"nodes", "similar_to_next", "dims", "dim_counts", "dim_support", "rows"}) j[key] = Json::array();
            j["reference"] = nullptr;
            return j;
        }
        const auto fo = order_features(ds, snap_->table, sel->node_ids, *sort, reference);
        const std::vector<std::size_t> dims(fo.dims.begin() + static_cast<std::ptrdiff_t>(lo),
                                            fo.dims.begin() + static_cast<std::ptrdiff_t>(hi));
        Json counts = Json::array(), support = Json::array(), rows = Json::array();
        for (std::size_t c : dims) {
            counts.push_back(fo.dim_counts[c]);
            support.push_back(fo.dim_support[c]);
        }
        for (NodeId v : fo.nodes) rows.push_back(feature_row(ds, v, dims));
        std::vector<bool> similar = fo.similar_to_next;
        j["nodes"] = fo.nodes;
        j["similar_to_next"] = similar;
        j["reference"] = fo.reference;
        j["dims"] = dims;
        j["dim_counts"] = counts;
        j["dim_support"] = support;
        j["rows"] = rows;
        return j;
    }

    Json node(const std::string& id_text) const {
        NodeId id = 0;
        try {
            id = detail::parse_unsigned<NodeId>(id_text, "node id");
        } catch (const ApiError&) {
            throw detail::not_found("node '" + id_text + "' not found");
        }
        if (id >= snap_->dataset.node_count()) throw detail::not_found("node " + id_text + " not found");
        const auto& ds = snap_->dataset;
        const auto& r = snap_->table.rows[id];
        Json similar = Json::array();
        for (NodeId t : r.similar_train_ids)
            similar.push_back({{"id", t},
                               {"gt", ds.label(t)},
                               {"p1", snap_->table.rows[t].pred[0]},
                               {"similarity", cosine_similarity(ds.features().row(id), ds.features().row(t))},
                               {"features", feature_row(ds, t)}});
        return {{"row", row_to_json(r)}, {"csv", metrics_csv_row(r)}, {"features", feature_row(ds, id)}, {"similar", similar}};
    }

    std::shared_ptr<const Snapshot> snap_;
    ProjectionParams params_;
    mutable std::shared_mutex sel_mutex_;
    std::map<std::string, std::shared_ptr<const Selection>, std::less<>> selections_;
    std::mutex proj_mutex_;
    std::map<std::string, std::shared_future<std::shared_ptr<const ProjectionPlane>>> projections_;
};

} // namespace gnndiag
