#pragma once

// Trained-bundle text artifact (JSON):
//
//   {"format": "gnndiag-bundle/1", "seed": S,
//    "models": {"gnn": M, "gnnwuf": M, "mlp": M}}
//
//   M = {"spec": {...}, "config": {...},
//        "parameters": [{"name", "rows", "cols", "values": [row-major]}],
//        "predictions": {"labels": [...], "probabilities": [[...], ...]},
//        "accuracy": {"train", "validation", "test", "all"},
//        "loss_history": [...]}
//
// Doubles are written in shortest round-trip form, so identical bundles
// produce identical bytes.

#include "gnndiag/core/error.hpp"
#include "gnndiag/graph/dataset_io.hpp"
#include "gnndiag/models/train.hpp"

#include <nlohmann/json.hpp>

namespace gnndiag {

inline constexpr std::string_view kBundleFormat = "gnndiag-bundle/1";

namespace detail {

inline nlohmann::json matrix_rows_json(const Matrix& m) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::json model_to_json(const TrainedModel& m) {
    nlohmann::json j;
    j["spec"] = {{"architecture", to_string(m.spec.architecture)},
                 {"layer_sizes", m.spec.layer_sizes},
                 {"gat_heads", m.spec.gat_heads},
                 {"gat_output_heads", m.spec.gat_output_heads},
                 {"leaky_relu_slope", m.spec.leaky_relu_slope},
                 {"dropout_rate", m.spec.dropout_rate},
                 {"use_one_hot_inputs", m.spec.use_one_hot_inputs}};
    j["config"] = {{"epochs", m.config.epochs},
                   {"learning_rate", m.config.learning_rate},
                   {"weight_decay", m.config.weight_decay},
                   {"seed", m.config.seed}};
    auto params = nlohmann::json::array();
    for (std::size_t k = 0; k < m.params.size(); ++k) {
        const Matrix& t = m.params.tensors[k];
        std::vector<double> values;
        values.reserve(static_cast<std::size_t>(t.size()));
        for (Eigen::Index r = 0; r < t.rows(); ++r)
            for (Eigen::Index c = 0; c < t.cols(); ++c) values.push_back(t(r, c));
        params.push_back({{"name", m.params.names[k]}, {"rows", t.rows()}, {"cols", t.cols()}, {"values", values}});
    }
    j["parameters"] = std::move(params);
    j["predictions"] = {{"labels", m.predictions.labels},
                        {"probabilities", matrix_rows_json(m.predictions.probabilities)}};
    j["accuracy"] = {{"train", m.accuracy.train},
                     {"validation", m.accuracy.validation},
                     {"test", m.accuracy.test},
                     {"all", m.accuracy.all}};
    j["loss_history"] = m.loss_history;
    return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
    try {
        TrainedModel m;
        const auto& s = j.at("spec");
        const auto arch = parse_architecture(s.at("architecture").get<std::string>());
        if (!arch) throw ParseError("unknown architecture " + s.at("architecture").dump());
        m.spec.architecture = *arch;
        m.spec.layer_sizes = s.at("layer_sizes").get<std::array<std::size_t, 3>>();
        m.spec.gat_heads = s.at("gat_heads").get<std::size_t>();
        m.spec.gat_output_heads = s.at("gat_output_heads").get<std::size_t>();
        m.spec.leaky_relu_slope = s.at("leaky_relu_slope").get<double>();
        m.spec.dropout_rate = s.at("dropout_rate").get<double>();
        m.spec.use_one_hot_inputs = s.at("use_one_hot_inputs").get<bool>();
        const auto& c = j.at("config");
        m.config.epochs = c.at("epochs").get<std::size_t>();
        m.config.learning_rate = c.at("learning_rate").get<double>();
        m.config.weight_decay = c.at("weight_decay").get<double>();
        m.config.seed = c.at("seed").get<std::uint64_t>();
        for (const auto& p : j.at("parameters")) {
            const auto rows = p.at("rows").get<Eigen::Index>();
            const auto cols = p.at("cols").get<Eigen::Index>();
            const auto values = p.at("values").get<std::vector<double>>();
            if (static_cast<Eigen::Index>(values.size()) != rows * cols)
                throw ParseError("parameter " + p.at("name").get<std::string>() + " has the wrong value count");
            Matrix t(rows, cols);
            for (Eigen::Index r = 0; r < rows; ++r)
                for (Eigen::Index col = 0; col < cols; ++col) t(r, col) = values[static_cast<std::size_t>(r * cols + col)];
            m.params.names.push_back(p.at("name").get<std::string>());
            m.params.tensors.push_back(std::move(t));
        }
        check_layout(m.spec, m.params);
        const auto& pred = j.at("predictions");
        m.predictions.labels = pred.at("labels").get<std::vector<ClassId>>();
        const auto probs = pred.at("probabilities").get<std::vector<std::vector<double>>>();
        if (probs.size() != m.predictions.labels.size()) throw ParseError("prediction arrays disagree in length");
        const auto classes = static_cast<Eigen::Index>(m.spec.class_count());
        m.predictions.probabilities = Matrix(static_cast<Eigen::Index>(probs.size()), classes);
        for (std::size_t r = 0; r < probs.size(); ++r) {
            if (static_cast<Eigen::Index>(probs[r].size()) != classes)
                throw ParseError("probability row " + std::to_string(r) + " has the wrong width");
            for (Eigen::Index col = 0; col < classes; ++col)
                m.predictions.probabilities(static_cast<Eigen::Index>(r), col) = probs[r][static_cast<std::size_t>(col)];
            const auto lbl = m.predictions.labels[r];
            if (lbl < 0 || lbl >= classes) throw ParseError("prediction label out of range at node " + std::to_string(r));
            m.predictions.confidence.push_back(m.predictions.probabilities(static_cast<Eigen::Index>(r), lbl));
        }
        const auto& a = j.at("accuracy");
        m.accuracy = {a.at("train").get<double>(), a.at("validation").get<double>(), a.at("test").get<double>(),
                      a.at("all").get<double>()};
        if (j.contains("loss_history")) m.loss_history = j.at("loss_history").get<std::vector<double>>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed model entry: ") + e.what());
    }
}

} // namespace detail

inline std::string serialize_bundle(const TrainedBundle& b) {
    nlohmann::json j;
    j["format"] = kBundleFormat;
    j["seed"] = b.seed;
    j["models"] = {{"gnn", detail::model_to_json(b.gnn)},
                   {"gnnwuf", detail::model_to_json(b.gnnwuf)},
                   {"mlp", detail::model_to_json(b.mlp)}};
    return j.dump(1) + "\n";
}

inline TrainedBundle parse_bundle(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("bundle is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("format") || j.at("format") != kBundleFormat)
        throw ParseError("not a gnndiag-bundle/1 document");
    if (!j.contains("models") || !j.at("models").is_object()) throw ParseError("bundle has no models");
    const auto& models = j.at("models");
    for (const char* key : {"gnn", "gnnwuf", "mlp"}) {
        if (!models.contains(key)) throw ParseError(std::string("bundle is missing model \"") + key + "\"");
    }
    TrainedBundle b;
    b.seed = j.value("seed", std::uint64_t{0});
    b.gnn = detail::model_from_json(models.at("gnn"));
    b.gnnwuf = detail::model_from_json(models.at("gnnwuf"));
    b.mlp = detail::model_from_json(models.at("mlp"));
    return b;
}

/// Checks that a bundle's predictions cover exactly the dataset's nodes and classes.
inline void check_bundle_matches(const TrainedBundle& b, const Dataset& ds) {
    for (const TrainedModel* m : {&b.gnn, &b.gnnwuf, &b.mlp}) {
        if (m->predictions.size() != ds.node_count())
            throw ValidationError("bundle predictions cover " + std::to_string(m->predictions.size()) +
                                  " nodes, dataset has " + std::to_string(ds.node_count()));
        if (m->spec.class_count() != ds.class_count())
            throw ValidationError("bundle class count does not match dataset");
    }
}

inline TrainedBundle load_bundle(const std::filesystem::path& path) { return parse_bundle(read_text_file(path)); }

inline void save_bundle(const TrainedBundle& b, const std::filesystem::path& path) {
    write_text_file(path, serialize_bundle(b));
}

} // namespace gnndiag
