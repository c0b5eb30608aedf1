#pragma once

// Dataset file format (JSON text):
//
//   {
//     "format": "gnndiag-dataset/1",
//     "nodes": N,
//     "class_count": C,                   // optional when class_names given
//     "edges": [[u, v], ...],             // undirected, each pair once
//     "features": {"dim": d, "dense": [[...], ...]}
//               | {"dim": d, "sparse": [[node, dim, value], ...]},
//     "labels": [y_0, ..., y_{N-1}],
//     "masks": {"train": [...], "validation": [...], "test": [...]},
//     "class_names": [...],               // optional
//     "feature_names": [...],             // optional
//     "directed": false                   // optional; true is rejected
//   }
//
// Canonical output sorts edges (u < v, lexicographic), writes sparse
// triplets sorted by (node, dim) when d > 1000 and dense rows otherwise.

#include "gnndiag/core/error.hpp"
#include "gnndiag/graph/dataset.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace gnndiag {

inline constexpr std::string_view kDatasetFormat = "gnndiag-dataset/1";
inline constexpr std::size_t kSparseFeatureThreshold = 1000;

inline DatasetParts to_parts(const Dataset& ds) {
    DatasetParts p;
    p.node_count = ds.node_count();
    for (const auto& e : ds.edges()) p.edges.emplace_back(e.u, e.v);
    p.features = ds.features();
    p.labels.assign(ds.labels().begin(), ds.labels().end());
    p.class_count = ds.class_count();
    for (NodeId i = 0; i < ds.node_count(); ++i) {
        if (ds.in_train(i)) p.train.push_back(i);
        if (ds.in_validation(i)) p.validation.push_back(i);
        if (ds.in_test(i)) p.test.push_back(i);
    }
    p.class_names = ds.class_names();
    p.feature_names = ds.feature_names();
    return p;
}

namespace detail {

template <class T>
T json_get(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw ParseError(std::string("missing field \"") + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("field \"") + key + "\": " + e.what());
    }
}

} // namespace detail

inline Dataset dataset_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("dataset document must be a JSON object");
    if (j.contains("format") && j.at("format") != kDatasetFormat)
        throw ParseError("unsupported dataset format " + j.at("format").dump());
    if (j.contains("directed") && j.at("directed").is_boolean() && j.at("directed").get<bool>())
        throw ValidationError("directed graphs are not supported; supply each undirected edge once");

    DatasetParts p;
    const auto n = detail::json_get<std::int64_t>(j, "nodes");
    if (n <= 0) throw ValidationError("\"nodes\" must be positive");
    p.node_count = static_cast<std::size_t>(n);

    p.edges = detail::json_get<std::vector<std::pair<std::int64_t, std::int64_t>>>(j, "edges");
    p.labels = detail::json_get<std::vector<std::int64_t>>(j, "labels");
    if (j.contains("class_names")) p.class_names = detail::json_get<std::vector<std::string>>(j, "class_names");
    if (j.contains("feature_names"))
        p.feature_names = detail::json_get<std::vector<std::string>>(j, "feature_names");
    if (j.contains("class_count")) {
        const auto c = detail::json_get<std::int64_t>(j, "class_count");
        if (c <= 0) throw ValidationError("\"class_count\" must be positive");
        p.class_count = static_cast<std::size_t>(c);
    } else if (!p.class_names.empty()) {
        p.class_count = p.class_names.size();
    } else {
        throw ParseError("missing field \"class_count\"");
    }

    if (!j.contains("features")) throw ParseError("missing field \"features\"");
    const auto& f = j.at("features");
    const auto dim = detail::json_get<std::int64_t>(f, "dim");
    if (dim < 0) throw ValidationError("feature dim must be non-negative");
    p.features = FeatureMatrix::Zero(n, dim);
    if (f.contains("dense")) {
        const auto rows = detail::json_get<std::vector<std::vector<double>>>(f, "dense");
        if (static_cast<std::int64_t>(rows.size()) != n)
            throw ValidationError("dense features: expected " + std::to_string(n) + " rows, got " +
                                  std::to_string(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (static_cast<std::int64_t>(rows[r].size()) != dim)
                throw ValidationError("dense features: row " + std::to_string(r) + " has " +
                                      std::to_string(rows[r].size()) + " values, expected " + std::to_string(dim));
            for (std::size_t c = 0; c < rows[r].size(); ++c) p.features(r, c) = rows[r][c];
        }
    } else if (f.contains("sparse")) {
        if (!f.at("sparse").is_array()) throw ParseError("sparse features must be an array");
        std::size_t k = 0;
        for (const auto& t : f.at("sparse")) {
            if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() || !t[1].is_number_integer() ||
                !t[2].is_number())
                throw ParseError("sparse triplet " + std::to_string(k) + " must be [node, dim, value]");
            const auto r = t[0].get<std::int64_t>();
            const auto c = t[1].get<std::int64_t>();
            if (r < 0 || r >= n || c < 0 || c >= dim)
                throw ValidationError("sparse triplet " + std::to_string(k) + ": index out of range");
            p.features(r, c) = t[2].get<double>();
            ++k;
        }
    } else {
        throw ParseError("features need either \"dense\" or \"sparse\"");
    }

    if (!j.contains("masks")) throw ParseError("missing field \"masks\"");
    const auto& m = j.at("masks");
    p.train = detail::json_get<std::vector<std::int64_t>>(m, "train");
    if (m.contains("validation")) p.validation = detail::json_get<std::vector<std::int64_t>>(m, "validation");
    if (m.contains("test")) p.test = detail::json_get<std::vector<std::int64_t>>(m, "test");

    return Dataset::create(std::move(p));
}

inline nlohmann::json dataset_to_json(const Dataset& ds) {
    nlohmann::json j;
    j["format"] = kDatasetFormat;
    j["nodes"] = ds.node_count();
    j["class_count"] = ds.class_count();
    auto edges = nlohmann::json::array();
    for (const auto& e : ds.edges()) edges.push_back({e.u, e.v});
    j["edges"] = std::move(edges);

    const auto& x = ds.features();
    nlohmann::json f;
    f["dim"] = ds.feature_dim();
    if (ds.feature_dim() > kSparseFeatureThreshold) {
        auto triplets = nlohmann::json::array();
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            for (Eigen::Index c = 0; c < x.cols(); ++c) {
                if (x(r, c) != 0.0) triplets.push_back({r, c, x(r, c)});
            }
        }
        f["sparse"] = std::move(triplets);
    } else {
        auto rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            auto row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < x.cols(); ++c) row.push_back(x(r, c));
            rows.push_back(std::move(row));
        }
        f["dense"] = std::move(rows);
    }
    j["features"] = std::move(f);
    j["labels"] = std::vector<ClassId>(ds.labels().begin(), ds.labels().end());
    j["masks"] = {{"train", subset_mask(ds, Subset::Train)},
                  {"validation", subset_mask(ds, Subset::Validation)},
                  {"test", subset_mask(ds, Subset::Test)}};
    if (!ds.class_names().empty()) j["class_names"] = ds.class_names();
    if (!ds.feature_names().empty()) j["feature_names"] = ds.feature_names();
    return j;
}

inline Dataset parse_dataset(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("dataset is not valid JSON: ") + e.what());
    }
    return dataset_from_json(j);
}

/// Canonical text form; byte-stable for equal datasets.
inline std::string serialize_dataset(const Dataset& ds) { return dataset_to_json(ds).dump(1) + "\n"; }

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

inline Dataset load_dataset(const std::filesystem::path& path) { return parse_dataset(read_text_file(path)); }

inline void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    write_text_file(path, serialize_dataset(ds));
}

} // namespace gnndiag
