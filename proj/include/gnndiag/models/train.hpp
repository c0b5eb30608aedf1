#pragma once

#include "gnndiag/core/error.hpp"
#include "gnndiag/core/random.hpp"
#include "gnndiag/graph/dataset.hpp"
#include "gnndiag/models/model_spec.hpp"
#include "gnndiag/models/network.hpp"

#include <cmath>
#include <future>
#include <span>
#include <string>
#include <vector>

namespace gnndiag {

/// Row-wise softmax, max-shifted.
inline Matrix softmax_rows(const Matrix& logits) {
    Matrix p(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double mx = logits.row(r).maxCoeff();
        p.row(r) = (logits.row(r).array() - mx).exp().matrix();
        p.row(r) /= p.row(r).sum();
    }
    return p;
}

/// Index of the row maximum; ties go to the lowest class id.
inline ClassId argmax_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < row.size(); ++c) {
        if (row[c] > row[best]) best = c;
    }
    return static_cast<ClassId>(best);
}

struct LossAndGradient {
    double loss = 0.0;
    Matrix d_logits;
};

/// Mean softmax cross-entropy over `nodes`, with gradient w.r.t. logits.
inline LossAndGradient softmax_cross_entropy(const Matrix& logits, std::span<const ClassId> labels,
                                             std::span<const NodeId> nodes, double scale = 1.0) {
    LossAndGradient out;
    out.d_logits = Matrix::Zero(logits.rows(), logits.cols());
    if (nodes.empty()) return out;
    const double inv = scale / static_cast<double>(nodes.size());
    for (NodeId i : nodes) {
        const double mx = logits.row(i).maxCoeff();
        const Eigen::RowVectorXd e = (logits.row(i).array() - mx).exp().matrix();
        const double z = e.sum();
        out.loss -= (logits(i, labels[i]) - mx - std::log(z));
        out.d_logits.row(i) = e / z;
        out.d_logits(i, labels[i]) -= 1.0;
        out.d_logits.row(i) *= inv;
    }
    out.loss *= inv;
    return out;
}

struct GradientResult {
    double loss = 0.0;
    Parameters gradients;
};

/// Exact gradients of (scale × mean cross-entropy over train_nodes) in
/// evaluation mode (no dropout).
inline GradientResult gradients(const ModelSpec& spec, const Parameters& params, const PropagationGraph& graph,
                                const NodeInputs& inputs, std::span<const ClassId> labels,
                                std::span<const NodeId> train_nodes, double scale = 1.0) {
    ForwardTape tape;
    const Matrix logits = forward(spec, params, graph, inputs, nullptr, &tape);
    auto lg = softmax_cross_entropy(logits, labels, train_nodes, scale);
    return {lg.loss, backward(spec, params, graph, inputs, nullptr, tape, lg.d_logits)};
}

inline GradientResult gradients(const ModelSpec& spec, const Parameters& params, const Dataset& ds,
                                const NodeInputs& inputs, std::span<const NodeId> train_nodes, double scale = 1.0) {
    return gradients(spec, params, PropagationGraph(ds), inputs, ds.labels(), train_nodes, scale);
}

/// Adam with L2 weight decay folded into the gradient.
class Adam {
public:
    explicit Adam(const Parameters& like, double lr, double weight_decay = 0.0, double beta1 = 0.9,
                  double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), wd_(weight_decay), b1_(beta1), b2_(beta2), eps_(eps), m_(like.zeros_like()), v_(like.zeros_like()) {}

    void step(Parameters& params, const Parameters& grads) {
        ++t_;
        const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
        for (std::size_t k = 0; k < params.size(); ++k) {
            Matrix g = grads.tensors[k];
            if (wd_ > 0.0) g += wd_ * params.tensors[k];
            m_.tensors[k] = b1_ * m_.tensors[k] + (1.0 - b1_) * g;
            v_.tensors[k] = b2_ * v_.tensors[k] + (1.0 - b2_) * g.cwiseProduct(g);
            params.tensors[k].array() -=
                lr_ * (m_.tensors[k].array() / c1) / ((v_.tensors[k].array() / c2).sqrt() + eps_);
        }
    }

private:
    double lr_, wd_, b1_, b2_, eps_;
    std::size_t t_ = 0;
    Parameters m_, v_;
};

/// Per-node probabilities, argmax labels and confidences.
struct PredictionSet {
    Matrix probabilities;
    std::vector<ClassId> labels;
    std::vector<double> confidence;

    static PredictionSet from_logits(const Matrix& logits) {
        PredictionSet p;
        p.probabilities = softmax_rows(logits);
        for (Eigen::Index r = 0; r < logits.rows(); ++r) {
            const ClassId c = argmax_row(p.probabilities.row(r));
            p.labels.push_back(c);
            p.confidence.push_back(p.probabilities(r, c));
        }
        return p;
    }
    std::size_t size() const { return labels.size(); }
};

struct Accuracy {
    double train = 0.0;
    double validation = 0.0;
    double test = 0.0;
    double all = 0.0;
};

inline Accuracy accuracy(const Dataset& ds, std::span<const ClassId> predicted) {
    std::array<std::size_t, 4> hit{}, total{};
    for (NodeId i = 0; i < ds.node_count(); ++i) {
        const bool ok = predicted[i] == ds.label(i);
        const std::size_t slot = ds.in_train(i) ? 0 : ds.in_validation(i) ? 1 : ds.in_test(i) ? 2 : 3;
        if (slot < 3) {
            total[slot] += 1;
            hit[slot] += ok;
        }
        total[3] += 1;
        hit[3] += ok;
    }
    auto frac = [](std::size_t h, std::size_t t) { return t ? static_cast<double>(h) / static_cast<double>(t) : 0.0; };
    return {frac(hit[0], total[0]), frac(hit[1], total[1]), frac(hit[2], total[2]), frac(hit[3], total[3])};
}

struct TrainedModel {
    ModelSpec spec;
    TrainConfig config;
    Parameters params;
    PredictionSet predictions;
    Accuracy accuracy;
    std::vector<double> loss_history;
};

inline NodeInputs model_inputs(const ModelSpec& spec, const Dataset& ds) {
    return spec.use_one_hot_inputs ? NodeInputs::identity(ds.node_count()) : NodeInputs::dense(ds.features());
}

/// Evaluation-mode predictions for already trained parameters.
inline PredictionSet predict(const ModelSpec& spec, const Parameters& params, const Dataset& ds) {
    const PropagationGraph graph(ds);
    return PredictionSet::from_logits(forward(spec, params, graph, model_inputs(spec, ds)));
}

/// Full-batch training on the train mask with Adam.  Deterministic in
/// config.seed: the stream first initialises parameters, then draws the
/// input and hidden dropout masks for each epoch in that order.
inline TrainedModel train(const ModelSpec& spec, const TrainConfig& config, const Dataset& ds) {
    spec.validate();
    config.validate();
    const std::size_t expected_in = spec.use_one_hot_inputs ? ds.node_count() : ds.feature_dim();
    if (spec.input_dim() != expected_in)
        throw DimensionError("model input width " + std::to_string(spec.input_dim()) + " does not match dataset (" +
                             std::to_string(expected_in) + ")");
    if (spec.class_count() != ds.class_count())
        throw DimensionError("model output width " + std::to_string(spec.class_count()) +
                             " does not match class count " + std::to_string(ds.class_count()));

    Rng rng(config.seed);
    TrainedModel out{spec, config, init_parameters(spec, rng), {}, {}, {}};
    const PropagationGraph graph(ds);
    const NodeInputs inputs = model_inputs(spec, ds);
    Adam adam(out.params, config.learning_rate, config.weight_decay);
    const auto& train_ids = ds.train_ids();
    const auto n = static_cast<Eigen::Index>(ds.node_count());

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        DropoutMasks masks;
        const DropoutMasks* active = nullptr;
        if (spec.dropout_rate > 0.0) {
            masks.input = inputs.sample_mask(rng, spec.dropout_rate);
            masks.hidden = NodeInputs::sample_dropout(rng, spec.dropout_rate, n,
                                                      static_cast<Eigen::Index>(spec.hidden_width()));
            active = &masks;
        }
        ForwardTape tape;
        const Matrix logits = forward(spec, out.params, graph, inputs, active, &tape);
        const auto lg = softmax_cross_entropy(logits, ds.labels(), train_ids);
        if (!std::isfinite(lg.loss))
            throw NumericError("non-finite training loss at epoch " + std::to_string(epoch), epoch);
        out.loss_history.push_back(lg.loss);
        const Parameters grads = backward(spec, out.params, graph, inputs, active, tape, lg.d_logits);
        adam.step(out.params, grads);
    }

    out.predictions = PredictionSet::from_logits(forward(spec, out.params, graph, inputs));
    out.accuracy = accuracy(ds, out.predictions.labels);
    return out;
}

/// The GNN under diagnosis plus its two proxies.
struct TrainedBundle {
    TrainedModel gnn;
    TrainedModel gnnwuf;
    TrainedModel mlp;
    std::uint64_t seed = 0;
};

/// Model specs of the trio for a dataset: the GNN, the same architecture on
/// one-hot inputs, and an MLP with the GNN's hidden width.
inline std::array<ModelSpec, 3> trio_specs(Architecture arch, const Dataset& ds) {
    if (arch == Architecture::MLP) throw Error("the diagnosed model must be a GNN (gcn or gat)");
    ModelSpec gnn = default_spec(arch, ds.feature_dim(), ds.class_count());
    ModelSpec wuf = gnn;
    wuf.layer_sizes[0] = ds.node_count();
    wuf.use_one_hot_inputs = true;
    ModelSpec mlp = default_spec(Architecture::MLP, ds.feature_dim(), ds.class_count());
    mlp.layer_sizes[1] = gnn.hidden_width();
    mlp.dropout_rate = gnn.dropout_rate;
    return {gnn, wuf, mlp};
}

/// Trains the trio concurrently.  Each model draws from its own labeled
/// sub-seed of `seed`, so results do not depend on scheduling.
inline TrainedBundle train_trio(const std::array<ModelSpec, 3>& specs, TrainConfig config, const Dataset& ds,
                                std::uint64_t seed) {
    auto launch = [&](const ModelSpec& spec, const char* label) {
        TrainConfig c = config;
        c.seed = derive_seed(seed, label);
        return std::async(std::launch::async, [spec, c, &ds] { return train(spec, c, ds); });
    };
    auto f_gnn = launch(specs[0], "gnn");
    auto f_wuf = launch(specs[1], "gnnwuf");
    auto f_mlp = launch(specs[2], "mlp");
    TrainedBundle b;
    b.gnn = f_gnn.get();
    b.gnnwuf = f_wuf.get();
    b.mlp = f_mlp.get();
    b.seed = seed;
    return b;
}

inline TrainedBundle train_trio(Architecture arch, const TrainConfig& config, const Dataset& ds, std::uint64_t seed) {
    return train_trio(trio_specs(arch, ds), config, ds, seed);
}

} // namespace gnndiag
