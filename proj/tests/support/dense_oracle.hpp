#pragma once

// Dense-matrix reference forward passes, written straight from the layer
// formulas with N×N matrices and no CSR machinery.

#include "gnndiag/graph/dataset.hpp"
#include "gnndiag/models/model_spec.hpp"

#include <cmath>

namespace gnndiag::testing {

inline Matrix dense_adjacency_with_self_loops(const Dataset& ds) {
    const auto n = static_cast<Eigen::Index>(ds.node_count());
    Matrix a = Matrix::Identity(n, n);
    for (const auto& e : ds.edges()) {
        a(e.u, e.v) = 1.0;
        a(e.v, e.u) = 1.0;
    }
    return a;
}

inline Matrix normalized_adjacency(const Dataset& ds) {
    const Matrix a = dense_adjacency_with_self_loops(ds);
    const Eigen::VectorXd inv_sqrt = a.rowwise().sum().array().rsqrt();
    return inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
}

inline Matrix add_bias(Matrix m, const Matrix& b) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m.row(r) += b.row(0);
    return m;
}

inline Matrix dense_gcn(const Dataset& ds, const Parameters& p, const Matrix& x) {
    const Matrix ahat = normalized_adjacency(ds);
    const Matrix h = add_bias(ahat * x * p.tensors[0], p.tensors[1]).cwiseMax(0.0);
    return add_bias(ahat * h * p.tensors[2], p.tensors[3]);
}

inline Matrix dense_mlp(const Parameters& p, const Matrix& x) {
    const Matrix h = add_bias(x * p.tensors[0], p.tensors[1]).cwiseMax(0.0);
    return add_bias(h * p.tensors[2], p.tensors[3]);
}

/// Dense attention matrix of one head: α(i, j) over j ∈ N(i) ∪ {i}.
inline Matrix dense_attention(const Matrix& adj, const Matrix& projected, const Matrix& a_src, const Matrix& a_dst,
                              double slope) {
    const auto n = adj.rows();
    Matrix alpha = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double z = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (adj(i, j) == 0.0) continue;
            const double s = (a_dst.transpose() * projected.row(i).transpose())(0, 0) +
                             (a_src.transpose() * projected.row(j).transpose())(0, 0);
            alpha(i, j) = std::exp(s > 0 ? s : slope * s);
            z += alpha(i, j);
        }
        alpha.row(i) /= z;
    }
    return alpha;
}

inline Matrix dense_gat(const Dataset& ds, const ModelSpec& spec, const Parameters& p, const Matrix& x) {
    const Matrix adj = dense_adjacency_with_self_loops(ds);
    const auto n = adj.rows();
    const auto width = static_cast<Eigen::Index>(spec.layer_sizes[1]);
    Matrix hidden(n, width * static_cast<Eigen::Index>(spec.gat_heads));
    for (std::size_t h = 0; h < spec.gat_heads; ++h) {
        const Matrix proj = x * p.tensors[3 * h];
        const Matrix alpha = dense_attention(adj, proj, p.tensors[3 * h + 1], p.tensors[3 * h + 2], spec.leaky_relu_slope);
        hidden.middleCols(static_cast<Eigen::Index>(h) * width, width) = alpha * proj;
    }
    const std::size_t b1 = 3 * spec.gat_heads;
    hidden = add_bias(hidden, p.tensors[b1]);
    hidden = hidden.unaryExpr([](double v) { return v > 0 ? v : std::exp(v) - 1.0; });
    Matrix out = Matrix::Zero(n, static_cast<Eigen::Index>(spec.class_count()));
    for (std::size_t h = 0; h < spec.gat_output_heads; ++h) {
        const std::size_t k = b1 + 1 + 3 * h;
        const Matrix proj = hidden * p.tensors[k];
        const Matrix alpha = dense_attention(adj, proj, p.tensors[k + 1], p.tensors[k + 2], spec.leaky_relu_slope);
        out += alpha * proj;
    }
    out /= static_cast<double>(spec.gat_output_heads);
    return add_bias(out, p.tensors[b1 + 1 + 3 * spec.gat_output_heads]);
}

} // namespace gnndiag::testing
