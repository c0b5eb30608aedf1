#pragma once

#include "gnndiag/core/random.hpp"
#include "gnndiag/graph/dataset_io.hpp"

#include <algorithm>

namespace gnndiag {

/// Random class-balanced split: per class (ascending) the node ids are
/// shuffled, the first train_per_class go to train, the next
/// validation_per_class to validation, the rest to test.  Small classes
/// fill train first.
inline Dataset class_balanced_split(const Dataset& ds, std::size_t train_per_class, std::size_t validation_per_class,
                                    std::uint64_t seed) {
    DatasetParts p = to_parts(ds);
    p.train.clear();
    p.validation.clear();
    p.test.clear();
    std::vector<std::vector<std::int64_t>> by_class(ds.class_count());
    for (NodeId i = 0; i < ds.node_count(); ++i) by_class[static_cast<std::size_t>(ds.label(i))].push_back(i);
    Rng rng(seed);
    for (auto& ids : by_class) {
        shuffle(ids.begin(), ids.end(), rng);
        for (std::size_t k = 0; k < ids.size(); ++k) {
            if (k < train_per_class) p.train.push_back(ids[k]);
            else if (k < train_per_class + validation_per_class) p.validation.push_back(ids[k]);
            else p.test.push_back(ids[k]);
        }
    }
    for (auto* v : {&p.train, &p.validation, &p.test}) std::sort(v->begin(), v->end());
    return Dataset::create(std::move(p));
}

} // namespace gnndiag
