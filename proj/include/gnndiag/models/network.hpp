#pragma once

// Forward passes and analytic reverse-mode gradients for the three fixed
// two-layer architectures.
//
//   GCN:  Z1 = Â (X W1) + b1,  H1 = relu(Z1),  logits = Â (H1 W2) + b2
//   MLP:  same with Â replaced by the identity
//   GAT:  per head, P = X W, e_ij = leaky(a_dst·P_i + a_src·P_j) over
//         j ∈ N(i) ∪ {i}, α = row softmax of e, out_i = Σ_j α_ij P_j;
//         hidden heads concatenated then ELU, output heads averaged
//
// Â = D^{-1/2} (A + I) D^{-1/2} with D counting the self loop.  Dropout
// masks, when given, hold 0 or 1/(1-p) and multiply the input of each layer.

#include "gnndiag/core/error.hpp"
#include "gnndiag/graph/dataset.hpp"
#include "gnndiag/models/model_spec.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace gnndiag {

/// N(i) ∪ {i} in CSR form, with GCN normalisation coefficients per entry.
class PropagationGraph {
public:
    explicit PropagationGraph(const Dataset& ds) : n_(ds.node_count()) {
        offsets_.assign(n_ + 1, 0);
        for (NodeId i = 0; i < n_; ++i) offsets_[i + 1] = offsets_[i] + ds.degree(i) + 1;
        targets_.reserve(offsets_.back());
        for (NodeId i = 0; i < n_; ++i) {
            bool self_done = false;
            for (NodeId j : ds.neighbors(i)) {
                if (!self_done && j > i) {
                    targets_.push_back(i);
                    self_done = true;
                }
                targets_.push_back(j);
            }
            if (!self_done) targets_.push_back(i);
        }
        coeff_.resize(targets_.size());
        for (NodeId i = 0; i < n_; ++i) {
            const double di = static_cast<double>(offsets_[i + 1] - offsets_[i]);
            for (std::size_t e = offsets_[i]; e < offsets_[i + 1]; ++e) {
                const NodeId j = targets_[e];
                const double dj = static_cast<double>(offsets_[j + 1] - offsets_[j]);
                coeff_[e] = 1.0 / (std::sqrt(di) * std::sqrt(dj));
            }
        }
    }

    std::size_t node_count() const noexcept { return n_; }
    std::size_t entry_count() const noexcept { return targets_.size(); }
    std::size_t begin(NodeId i) const { return offsets_[i]; }
    std::size_t end(NodeId i) const { return offsets_[i + 1]; }
    NodeId target(std::size_t e) const { return targets_[e]; }
    double gcn_coefficient(std::size_t e) const { return coeff_[e]; }

    /// out = Â m.  Â is symmetric, so this is also its own adjoint.
    Matrix gcn_aggregate(const Matrix& m) const {
        Matrix out = Matrix::Zero(m.rows(), m.cols());
        for (NodeId i = 0; i < n_; ++i) {
            for (std::size_t e = offsets_[i]; e < offsets_[i + 1]; ++e) out.row(i) += coeff_[e] * m.row(targets_[e]);
        }
        return out;
    }

private:
    std::size_t n_;
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> targets_;
    std::vector<double> coeff_;
};

/// Node input matrix: a non-owning view of a dense N×d matrix, or the
/// implicit N×N identity used for one-hot inputs.
class NodeInputs {
public:
    static NodeInputs dense(const Matrix& x) { return NodeInputs(&x, static_cast<std::size_t>(x.rows())); }
    static NodeInputs identity(std::size_t n) { return NodeInputs(nullptr, n); }

    bool is_identity() const noexcept { return dense_ == nullptr; }
    std::size_t rows() const noexcept { return n_; }
    std::size_t cols() const noexcept { return dense_ ? static_cast<std::size_t>(dense_->cols()) : n_; }

    /// (X ∘ mask) W.  Mask is N×d for dense inputs and N×1 (the diagonal)
    /// for the identity.
    Matrix times(const Matrix& w, const Matrix* mask = nullptr) const {
        if (static_cast<std::size_t>(w.rows()) != cols())
            throw DimensionError("input has " + std::to_string(cols()) + " columns but weight has " +
                                 std::to_string(w.rows()) + " rows");
        if (dense_) {
            if (mask) return dense_->cwiseProduct(*mask) * w;
            return (*dense_) * w;
        }
        if (mask) return mask->col(0).asDiagonal() * w;
        return w;
    }

    /// (X ∘ mask)^T g.
    Matrix transpose_times(const Matrix& g, const Matrix* mask = nullptr) const {
        if (dense_) {
            if (mask) return dense_->cwiseProduct(*mask).transpose() * g;
            return dense_->transpose() * g;
        }
        if (mask) return mask->col(0).asDiagonal() * g;
        return g;
    }

    Matrix sample_mask(Rng& rng, double rate) const {
        const auto r = static_cast<Eigen::Index>(n_);
        const auto c = static_cast<Eigen::Index>(dense_ ? dense_->cols() : 1);
        return sample_dropout(rng, rate, r, c);
    }

    static Matrix sample_dropout(Rng& rng, double rate, Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        const double keep = 1.0 / (1.0 - rate);
        // Row-major draw order so the stream does not depend on storage order.
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = uniform01(rng) < rate ? 0.0 : keep;
        return m;
    }

private:
    NodeInputs(const Matrix* d, std::size_t n) : dense_(d), n_(n) {}
    const Matrix* dense_;
    std::size_t n_;
};

/// One-hot input matrix materialised densely (row i = e_i).
inline Matrix one_hot_inputs(const Dataset& ds) {
    const auto n = static_cast<Eigen::Index>(ds.node_count());
    return Matrix::Identity(n, n);
}

struct DropoutMasks {
    std::optional<Matrix> input;
    std::optional<Matrix> hidden;
};

namespace detail {

inline double leaky_relu(double x, double slope) { return x > 0.0 ? x : slope * x; }
inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

struct GatHeadTape {
    Matrix projected;        // P = X W, N × width
    Eigen::VectorXd score;   // a_dst·P_i + a_src·P_j per CSR entry
    Eigen::VectorXd alpha;   // attention per CSR entry
};

struct GatLayerTape {
    std::vector<GatHeadTape> heads;
};

/// One GAT layer.  Parameters for the layer start at `first` in the flat
/// list as (W, att_src, att_dst) per head followed by the bias.
inline Matrix gat_layer_forward(const PropagationGraph& g, const NodeInputs& x, const Matrix* mask,
                                const Parameters& params, std::size_t first, std::size_t heads, bool concat,
                                double slope, GatLayerTape* tape) {
    const auto n = static_cast<Eigen::Index>(g.node_count());
    const auto width = params.tensors[first].cols();
    const Matrix& bias = params.tensors[first + 3 * heads];
    Matrix out = Matrix::Zero(n, concat ? width * static_cast<Eigen::Index>(heads) : width);
    if (tape) tape->heads.resize(heads);
    for (std::size_t h = 0; h < heads; ++h) {
        const Matrix& w = params.tensors[first + 3 * h];
        const Matrix& a_src = params.tensors[first + 3 * h + 1];
        const Matrix& a_dst = params.tensors[first + 3 * h + 2];
        Matrix p = x.times(w, mask);
        const Eigen::VectorXd s = p * a_src;
        const Eigen::VectorXd t = p * a_dst;
        Eigen::VectorXd score(static_cast<Eigen::Index>(g.entry_count()));
        Eigen::VectorXd alpha(static_cast<Eigen::Index>(g.entry_count()));
        Matrix head_out = Matrix::Zero(n, width);
        for (NodeId i = 0; i < g.node_count(); ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t e = g.begin(i); e < g.end(i); ++e) {
                score[e] = t[i] + s[g.target(e)];
                mx = std::max(mx, leaky_relu(score[e], slope));
            }
            double z = 0.0;
            for (std::size_t e = g.begin(i); e < g.end(i); ++e) {
                alpha[e] = std::exp(leaky_relu(score[e], slope) - mx);
                z += alpha[e];
            }
            for (std::size_t e = g.begin(i); e < g.end(i); ++e) {
                alpha[e] /= z;
                head_out.row(i) += alpha[e] * p.row(g.target(e));
            }
        }
        if (concat) out.middleCols(static_cast<Eigen::Index>(h) * width, width) = head_out;
        else out += head_out / static_cast<double>(heads);
        if (tape) tape->heads[h] = {std::move(p), std::move(score), std::move(alpha)};
    }
    out.rowwise() += bias.row(0);
    return out;
}

/// Backward through one GAT layer given dL/d(out).  Writes parameter
/// gradients into `grads` and, when `d_input` is non-null, dL/d(X ∘ mask).
inline void gat_layer_backward(const PropagationGraph& g, const NodeInputs& x, const Matrix* mask,
                               const Parameters& params, std::size_t first, std::size_t heads, bool concat,
                               double slope, const GatLayerTape& tape, const Matrix& d_out, Parameters& grads,
                               Matrix* d_input) {
    const auto width = params.tensors[first].cols();
    grads.tensors[first + 3 * heads] = d_out.colwise().sum();
    if (d_input) *d_input = Matrix::Zero(static_cast<Eigen::Index>(x.rows()), static_cast<Eigen::Index>(x.cols()));
    for (std::size_t h = 0; h < heads; ++h) {
        const Matrix& w = params.tensors[first + 3 * h];
        const Eigen::VectorXd a_src = params.tensors[first + 3 * h + 1].col(0);
        const Eigen::VectorXd a_dst = params.tensors[first + 3 * h + 2].col(0);
        const auto& ht = tape.heads[h];
        const Matrix d_head = concat ? Matrix(d_out.middleCols(static_cast<Eigen::Index>(h) * width, width))
                                     : Matrix(d_out / static_cast<double>(heads));
        Matrix d_p = Matrix::Zero(ht.projected.rows(), width);
        Eigen::VectorXd d_s = Eigen::VectorXd::Zero(ht.projected.rows());
        Eigen::VectorXd d_t = Eigen::VectorXd::Zero(ht.projected.rows());
        std::vector<double> d_alpha;
        for (NodeId i = 0; i < g.node_count(); ++i) {
            d_alpha.assign(g.end(i) - g.begin(i), 0.0);
            double weighted = 0.0;
            for (std::size_t e = g.begin(i); e < g.end(i); ++e) {
                const NodeId j = g.target(e);
                const double da = d_head.row(i).dot(ht.projected.row(j));
                d_alpha[e - g.begin(i)] = da;
                weighted += ht.alpha[e] * da;
                d_p.row(j) += ht.alpha[e] * d_head.row(i);
            }
            for (std::size_t e = g.begin(i); e < g.end(i); ++e) {
                const double de = ht.alpha[e] * (d_alpha[e - g.begin(i)] - weighted);
                const double dscore = de * (ht.score[e] > 0.0 ? 1.0 : slope);
                d_t[i] += dscore;
                d_s[g.target(e)] += dscore;
            }
        }
        grads.tensors[first + 3 * h + 1] = ht.projected.transpose() * d_s;
        grads.tensors[first + 3 * h + 2] = ht.projected.transpose() * d_t;
        d_p += d_s * a_src.transpose();
        d_p += d_t * a_dst.transpose();
        grads.tensors[first + 3 * h] = x.transpose_times(d_p, mask);
        if (d_input) *d_input += d_p * w.transpose();
    }
}

} // namespace detail

/// Intermediates kept by a forward pass for the backward pass.
struct ForwardTape {
    Architecture architecture = Architecture::GCN;
    Matrix pre_hidden;      // layer-1 output before the nonlinearity
    Matrix hidden_input;    // layer-2 input (after nonlinearity and dropout)
    detail::GatLayerTape gat1;
    detail::GatLayerTape gat2;
    Matrix logits;
};

/// Full forward pass.  `masks` enables training-mode dropout.
inline Matrix forward(const ModelSpec& spec, const Parameters& params, const PropagationGraph& graph,
                      const NodeInputs& inputs, const DropoutMasks* masks = nullptr, ForwardTape* tape = nullptr) {
    check_layout(spec, params);
    if (inputs.rows() != graph.node_count())
        throw DimensionError("inputs have " + std::to_string(inputs.rows()) + " rows, graph has " +
                             std::to_string(graph.node_count()) + " nodes");
    if (inputs.cols() != spec.input_dim())
        throw DimensionError("inputs have " + std::to_string(inputs.cols()) + " columns, model expects " +
                             std::to_string(spec.input_dim()));
    const Matrix* in_mask = masks && masks->input ? &*masks->input : nullptr;
    const Matrix* hid_mask = masks && masks->hidden ? &*masks->hidden : nullptr;

    Matrix pre_hidden;
    if (spec.architecture == Architecture::GAT) {
        pre_hidden = detail::gat_layer_forward(graph, inputs, in_mask, params, 0, spec.gat_heads, true,
                                               spec.leaky_relu_slope, tape ? &tape->gat1 : nullptr);
    } else {
        Matrix xw = inputs.times(params.tensors[0], in_mask);
        pre_hidden = spec.architecture == Architecture::GCN ? graph.gcn_aggregate(xw) : std::move(xw);
        pre_hidden.rowwise() += params.tensors[1].row(0);
    }

    Matrix hidden = spec.architecture == Architecture::GAT ? Matrix(pre_hidden.unaryExpr(&detail::elu))
                                                           : Matrix(pre_hidden.cwiseMax(0.0));
    if (hid_mask) hidden = hidden.cwiseProduct(*hid_mask);

    Matrix logits;
    if (spec.architecture == Architecture::GAT) {
        const std::size_t first = 3 * spec.gat_heads + 1;
        logits = detail::gat_layer_forward(graph, NodeInputs::dense(hidden), nullptr, params, first,
                                           spec.gat_output_heads, false, spec.leaky_relu_slope,
                                           tape ? &tape->gat2 : nullptr);
    } else {
        Matrix hw = hidden * params.tensors[2];
        logits = spec.architecture == Architecture::GCN ? graph.gcn_aggregate(hw) : std::move(hw);
        logits.rowwise() += params.tensors[3].row(0);
    }

    if (tape) {
        tape->architecture = spec.architecture;
        tape->pre_hidden = std::move(pre_hidden);
        tape->hidden_input = std::move(hidden);
        tape->logits = logits;
    }
    return logits;
}

/// Parameter gradients given dL/d(logits) and the tape of the matching
/// forward pass (same masks).
inline Parameters backward(const ModelSpec& spec, const Parameters& params, const PropagationGraph& graph,
                           const NodeInputs& inputs, const DropoutMasks* masks, const ForwardTape& tape,
                           const Matrix& d_logits) {
    const Matrix* in_mask = masks && masks->input ? &*masks->input : nullptr;
    const Matrix* hid_mask = masks && masks->hidden ? &*masks->hidden : nullptr;
    Parameters grads = params.zeros_like();

    Matrix d_hidden;
    if (spec.architecture == Architecture::GAT) {
        const std::size_t first = 3 * spec.gat_heads + 1;
        const auto hidden_view = NodeInputs::dense(tape.hidden_input);
        detail::gat_layer_backward(graph, hidden_view, nullptr, params, first, spec.gat_output_heads, false,
                                   spec.leaky_relu_slope, tape.gat2, d_logits, grads, &d_hidden);
    } else {
        const Matrix agg = spec.architecture == Architecture::GCN ? graph.gcn_aggregate(d_logits) : d_logits;
        grads.tensors[2] = tape.hidden_input.transpose() * agg;
        grads.tensors[3] = d_logits.colwise().sum();
        d_hidden = agg * params.tensors[2].transpose();
    }

    if (hid_mask) d_hidden = d_hidden.cwiseProduct(*hid_mask);
    Matrix d_pre = d_hidden;
    if (spec.architecture == Architecture::GAT) {
        for (Eigen::Index r = 0; r < d_pre.rows(); ++r)
            for (Eigen::Index c = 0; c < d_pre.cols(); ++c) {
                const double z = tape.pre_hidden(r, c);
                d_pre(r, c) *= z > 0.0 ? 1.0 : std::exp(z);
            }
        detail::gat_layer_backward(graph, inputs, in_mask, params, 0, spec.gat_heads, true, spec.leaky_relu_slope,
                                   tape.gat1, d_pre, grads, nullptr);
    } else {
        d_pre = d_pre.cwiseProduct((tape.pre_hidden.array() > 0.0).cast<double>().matrix());
        const Matrix agg = spec.architecture == Architecture::GCN ? graph.gcn_aggregate(d_pre) : d_pre;
        grads.tensors[0] = inputs.transpose_times(agg, in_mask);
        grads.tensors[1] = d_pre.colwise().sum();
    }
    return grads;
}

inline Matrix forward_gcn(const ModelSpec& spec, const Parameters& params, const PropagationGraph& graph,
                          const NodeInputs& inputs) {
    if (spec.architecture != Architecture::GCN) throw DimensionError("forward_gcn needs a GCN spec");
    return forward(spec, params, graph, inputs);
}

inline Matrix forward_gat(const ModelSpec& spec, const Parameters& params, const PropagationGraph& graph,
                          const NodeInputs& inputs) {
    if (spec.architecture != Architecture::GAT) throw DimensionError("forward_gat needs a GAT spec");
    return forward(spec, params, graph, inputs);
}

/// MLP ignores the graph entirely; a graph is only needed for the row count.
inline Matrix forward_mlp(const ModelSpec& spec, const Parameters& params, const NodeInputs& inputs) {
    if (spec.architecture != Architecture::MLP) throw DimensionError("forward_mlp needs an MLP spec");
    check_layout(spec, params);
    if (inputs.cols() != spec.input_dim())
        throw DimensionError("inputs have " + std::to_string(inputs.cols()) + " columns, model expects " +
                             std::to_string(spec.input_dim()));
    Matrix hidden = inputs.times(params.tensors[0]);
    hidden.rowwise() += params.tensors[1].row(0);
    hidden = hidden.cwiseMax(0.0);
    Matrix logits = hidden * params.tensors[2];
    logits.rowwise() += params.tensors[3].row(0);
    return logits;
}

/// Attention coefficients of one head (layer 1 or 2), per CSR entry of the
/// propagation graph.  Evaluation mode.
inline Eigen::VectorXd attention_coefficients(const ModelSpec& spec, const Parameters& params,
                                              const PropagationGraph& graph, const NodeInputs& inputs,
                                              std::size_t layer, std::size_t head) {
    if (spec.architecture != Architecture::GAT) throw DimensionError("attention needs a GAT spec");
    ForwardTape tape;
    forward(spec, params, graph, inputs, nullptr, &tape);
    const auto& layer_tape = layer == 1 ? tape.gat1 : tape.gat2;
    if (head >= layer_tape.heads.size()) throw DimensionError("no such attention head");
    return layer_tape.heads[head].alpha;
}

} // namespace gnndiag
