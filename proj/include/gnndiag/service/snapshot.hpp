#pragma once

// One immutable analysis unit: dataset, trained trio, metric table and the
// geometry derived from them.

#include "gnndiag/analysis/binning.hpp"
#include "gnndiag/analysis/layout.hpp"
#include "gnndiag/graph/dataset_io.hpp"
#include "gnndiag/metrics/node_metrics.hpp"
#include "gnndiag/models/bundle_io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

namespace gnndiag {

inline constexpr std::string_view kSnapshotFormat = "gnndiag-snapshot/1";

/// Contents of manifest.json.
struct SnapshotManifest {
    std::uint64_t seed = 0;
    Architecture architecture = Architecture::GCN;
    std::size_t k = 5;
};

inline std::string serialize_manifest(const SnapshotManifest& m) {
    nlohmann::json j;
    j["format"] = kSnapshotFormat;
    j["seed"] = m.seed;
    j["architecture"] = to_string(m.architecture);
    j["k"] = m.k;
    return j.dump(1) + "\n";
}

inline SnapshotManifest parse_manifest(const std::string& text) {
    SnapshotManifest m;
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.value("format", std::string()) != kSnapshotFormat) throw ParseError("not a gnndiag-snapshot/1 manifest");
        m.seed = j.at("seed").get<std::uint64_t>();
        const auto arch = parse_architecture(j.at("architecture").get<std::string>());
        if (!arch) throw ParseError("manifest: unknown architecture");
        m.architecture = *arch;
        m.k = j.value("k", std::size_t{5});
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
    if (m.k == 0) throw ValidationError("manifest: k must be positive");
    return m;
}

struct Snapshot {
    Dataset dataset;
    TrainedBundle bundle;
    NodeMetricsTable table;
    BinningSpec binning;
    BinnedTable binned;
    Points2 layout;
    Architecture architecture = Architecture::GCN;
    std::uint64_t seed = 0;
    std::string version;  // hex hash of the dataset and bundle text
};

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Derives every cached artifact.  The layout uses the "layout" sub-seed.
inline Snapshot build_snapshot(Dataset ds, TrainedBundle bundle, const SnapshotManifest& m) {
    check_bundle_matches(bundle, ds);
    Snapshot s{std::move(ds), std::move(bundle), {}, default_binning(), {}, {}, m.architecture, m.seed, {}};
    s.table = compute_table(s.dataset, s.bundle, m.k);
    s.binned = bin_metrics(s.table, s.binning, s.dataset.class_names());
    s.layout = graph_layout(s.dataset, derive_seed(m.seed, "layout"));
    s.version = hex64(fnv1a(serialize_dataset(s.dataset) + serialize_bundle(s.bundle)));
    return s;
}

/// Reads dataset.json, bundle.txt and manifest.json from a snapshot directory.
inline Snapshot load_snapshot(const std::filesystem::path& dir, std::optional<std::uint64_t> seed = std::nullopt) {
    auto manifest = parse_manifest(read_text_file(dir / "manifest.json"));
    if (seed) manifest.seed = *seed;
    return build_snapshot(load_dataset(dir / "dataset.json"), load_bundle(dir / "bundle.txt"), manifest);
}

} // namespace gnndiag
