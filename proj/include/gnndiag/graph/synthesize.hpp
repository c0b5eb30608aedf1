#pragma once

// Stochastic-block-model fixtures with class-correlated binary features.
//
// RNG stream (std::mt19937_64 seeded with `seed`), consumed in this order:
//   1. one uniform01 draw per node pair (i, j), i < j, lexicographic;
//      the edge exists when the draw is < intra (same class) or < inter;
//   2. one uniform01 draw per feature entry, row-major; the entry is the
//      class-indicator bit, flipped when the draw is < feature_noise;
//   3. per class in ascending order, a Fisher-Yates shuffle of the class's
//      node ids (uniform_index), then the first train_per_class go to the
//      train mask, the next validation_per_class to validation, the rest to
//      test.
//
// Node i has class i / n_per_class.  Feature dimension f belongs to class
// f / (feature_dim / classes); trailing dimensions beyond classes * block are
// pure noise (indicator 0).

#include "gnndiag/core/error.hpp"
#include "gnndiag/core/random.hpp"
#include "gnndiag/graph/dataset.hpp"

#include <string>

namespace gnndiag {

struct SynthesisParams {
    std::size_t n_per_class = 50;
    std::size_t classes = 3;
    double intra_edge_prob = 0.1;
    double inter_edge_prob = 0.01;
    std::size_t feature_dim = 12;
    double feature_noise = 0.1;
    /// 0 selects max(1, n_per_class / 5).
    std::size_t train_per_class = 0;
    /// 0 selects max(1, n_per_class / 5) when room remains.
    std::size_t validation_per_class = 0;
};

inline Dataset synthesize(const SynthesisParams& params, std::uint64_t seed) {
    const auto& p = params;
    if (p.classes == 0) throw ValidationError("synthesize: classes must be positive");
    if (p.n_per_class == 0) throw ValidationError("synthesize: n_per_class must be positive");
    if (p.feature_dim == 0) throw ValidationError("synthesize: feature_dim must be positive");
    auto prob_ok = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!prob_ok(p.intra_edge_prob) || !prob_ok(p.inter_edge_prob) || !prob_ok(p.feature_noise))
        throw ValidationError("synthesize: probabilities must lie in [0,1]");

    const std::size_t n = p.n_per_class * p.classes;
    const std::size_t train_k = p.train_per_class ? p.train_per_class : std::max<std::size_t>(1, p.n_per_class / 5);
    if (train_k > p.n_per_class) throw ValidationError("synthesize: train_per_class exceeds n_per_class");
    std::size_t val_k = p.validation_per_class ? p.validation_per_class : std::max<std::size_t>(1, p.n_per_class / 5);
    val_k = std::min(val_k, p.n_per_class - train_k);

    Rng rng(seed);
    DatasetParts parts;
    parts.node_count = n;
    parts.class_count = p.classes;
    for (std::size_t i = 0; i < n; ++i) parts.labels.push_back(static_cast<std::int64_t>(i / p.n_per_class));

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double prob = (i / p.n_per_class == j / p.n_per_class) ? p.intra_edge_prob : p.inter_edge_prob;
            if (uniform01(rng) < prob) parts.edges.emplace_back(i, j);
        }
    }

    const std::size_t block = p.feature_dim / p.classes;
    parts.features = FeatureMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p.feature_dim));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i / p.n_per_class;
        for (std::size_t f = 0; f < p.feature_dim; ++f) {
            const bool indicator = block > 0 && f / block == c;
            const bool flip = uniform01(rng) < p.feature_noise;
            parts.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = (indicator != flip) ? 1.0 : 0.0;
        }
    }

    for (std::size_t c = 0; c < p.classes; ++c) {
        std::vector<std::int64_t> ids;
        for (std::size_t k = 0; k < p.n_per_class; ++k) ids.push_back(static_cast<std::int64_t>(c * p.n_per_class + k));
        shuffle(ids.begin(), ids.end(), rng);
        for (std::size_t k = 0; k < ids.size(); ++k) {
            if (k < train_k) parts.train.push_back(ids[k]);
            else if (k < train_k + val_k) parts.validation.push_back(ids[k]);
            else parts.test.push_back(ids[k]);
        }
    }
    std::sort(parts.train.begin(), parts.train.end());
    std::sort(parts.validation.begin(), parts.validation.end());
    std::sort(parts.test.begin(), parts.test.end());

    for (std::size_t c = 0; c < p.classes; ++c) parts.class_names.push_back("class" + std::to_string(c));
    return Dataset::create(std::move(parts));
}

} // namespace gnndiag
