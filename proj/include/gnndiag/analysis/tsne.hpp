#pragma once

// Exact t-SNE on a precomputed distance matrix.

#include "gnndiag/analysis/plane_distance.hpp"
#include "gnndiag/core/error.hpp"
#include "gnndiag/core/random.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace gnndiag {

struct TsneParams {
    double perplexity = 30.0;
    std::size_t iterations = 1000;
    double early_exaggeration = 12.0;
    std::size_t exaggeration_iterations = 250;
    double learning_rate = 200.0;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    std::uint64_t seed = 0;
};

struct Embedding {
    Eigen::MatrixX2d coords;
    std::vector<double> kl_history;  // one entry per iteration, with exaggeration removed
};

namespace detail {

/// Row-conditional affinities p_{j|i} from squared distances, each row's
/// bandwidth bisected to reach the target entropy.
inline Eigen::MatrixXd conditional_affinities(const CondensedDistances& dist, double perplexity) {
    const auto n = static_cast<Eigen::Index>(dist.size());
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    const double target = std::log(perplexity);
    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double d = dist(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            d2[static_cast<std::size_t>(j)] = d * d;
        }
        double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
        for (int iter = 0; iter < 100; ++iter) {
            double dmin = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < n; ++j)
                if (j != i) dmin = std::min(dmin, d2[static_cast<std::size_t>(j)]);
            double sum = 0.0, weighted = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                const double dj = d2[static_cast<std::size_t>(j)] - dmin;
                const double w = std::exp(-beta * dj);
                p(i, j) = w;
                sum += w;
                weighted += w * dj;
            }
            // Entropy of the normalized row.
            const double entropy = std::log(sum) + beta * weighted / sum;
            p.row(i) /= sum;
            const double diff = entropy - target;
            if (std::abs(diff) < 1e-5) break;
            if (diff > 0) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
            } else {
                hi = beta;
                beta = (beta + lo) / 2.0;
            }
        }
    }
    return p;
}

inline double kl_divergence(const Eigen::MatrixXd& p, const Eigen::MatrixXd& num, double num_sum) {
    double kl = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            if (i == j || p(i, j) <= 0.0) continue;
            const double q = std::max(num(i, j) / num_sum, 1e-300);
            kl += p(i, j) * std::log(p(i, j) / q);
        }
    return kl;
}

} // namespace detail

inline double effective_perplexity(double requested, std::size_t n) {
    return std::max(1.0, std::min(requested, (static_cast<double>(n) - 1.0) / 3.0));
}

inline Embedding tsne(const CondensedDistances& dist, const TsneParams& params) {
    const auto n = static_cast<Eigen::Index>(dist.size());
    if (n < 2) throw Error("projection needs at least two items");
    for (double v : dist.values())
        if (!std::isfinite(v)) throw NumericError("distance matrix has a non-finite entry", 0);

    Eigen::MatrixXd p = detail::conditional_affinities(dist, effective_perplexity(params.perplexity, dist.size()));
    p = (p + p.transpose()).eval();
    p /= p.sum();
    p = p.cwiseMax(1e-12);
    p.diagonal().setZero();

    Rng rng(params.seed);
    Embedding out;
    Eigen::MatrixX2d& y = out.coords;
    y.resize(n, 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int c = 0; c < 2; ++c) y(i, c) = 1e-4 * standard_normal(rng);

    Eigen::MatrixX2d update = Eigen::MatrixX2d::Zero(n, 2);
    Eigen::MatrixX2d gains = Eigen::MatrixX2d::Ones(n, 2);
    Eigen::MatrixX2d grad(n, 2);
    Eigen::MatrixXd num(n, n);
    out.kl_history.reserve(params.iterations);

    for (std::size_t it = 0; it < params.iterations; ++it) {
        const bool exaggerating = it < params.exaggeration_iterations;
        const double ex = exaggerating ? params.early_exaggeration : 1.0;
        const double momentum = exaggerating ? params.initial_momentum : params.final_momentum;

        double num_sum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            num(i, i) = 0.0;
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double w = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
                num(i, j) = num(j, i) = w;
                num_sum += 2.0 * w;
            }
        }
        out.kl_history.push_back(detail::kl_divergence(p, num, num_sum));

        grad.setZero();
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i == j) continue;
                const double coef = (ex * p(i, j) - num(i, j) / num_sum) * num(i, j);
                grad.row(i) += 4.0 * coef * (y.row(i) - y.row(j));
            }

        for (Eigen::Index i = 0; i < n; ++i)
            for (int c = 0; c < 2; ++c) {
                const bool same_sign = (grad(i, c) > 0) == (update(i, c) > 0);
                gains(i, c) = same_sign ? std::max(gains(i, c) * 0.8, 0.01) : gains(i, c) + 0.2;
                update(i, c) = momentum * update(i, c) - params.learning_rate * gains(i, c) * grad(i, c);
            }
        y += update;
        y.rowwise() -= y.colwise().mean();
    }
    return out;
}

} // namespace gnndiag
