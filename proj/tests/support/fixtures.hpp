#pragma once

#include "gnndiag/graph/dataset.hpp"

namespace gnndiag::testing {

// K6: nodes 0-5, edges {0-1, 0-2, 1-2, 2-3, 3-4, 3-5}, labels A A A B B A,
// train {0, 4}, validation {1}, test {2, 3, 5}.  Must stay in sync with
// tests/data/k6.json.
inline DatasetParts k6_parts() {
    DatasetParts p;
    p.node_count = 6;
    p.edges = {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}, {3, 5}};
    p.features = FeatureMatrix(6, 3);
    p.features << 1.0, 0.0, 0.5,
                  0.9, 0.1, 0.0,
                  0.8, 0.0, 0.2,
                  0.0, 1.0, 0.3,
                  0.1, 0.9, 0.0,
                  0.2, 0.7, 0.1;
    p.labels = {0, 0, 0, 1, 1, 0};
    p.class_count = 2;
    p.train = {0, 4};
    p.validation = {1};
    p.test = {2, 3, 5};
    p.class_names = {"A", "B"};
    return p;
}

inline Dataset k6() { return Dataset::create(k6_parts()); }

} // namespace gnndiag::testing
