// gnndiag: batch driver for the diagnosis pipeline.

#include "gnndiag/graph/split.hpp"
#include "gnndiag/graph/synthesize.hpp"
#include "gnndiag/metrics/metrics_csv.hpp"
#include "gnndiag/service/report.hpp"
#include "gnndiag/service/server.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace gnndiag;

namespace {

enum Exit : int {
    kOk = 0,
    kUnexpected = 1,
    kUsage = 2,
    kParse = 3,
    kValidation = 4,
    kDimension = 5,
    kNumeric = 6,
    kIo = 7,
    kBind = 8,
};

constexpr const char* kExitHelp = R"(Exit codes:
  0  success
  1  unexpected failure
  2  bad command line
  3  malformed input file
  4  input violates a data invariant
  5  dataset/model dimension mismatch
  6  non-finite training loss
  7  file could not be read or written
  8  service could not bind its address)";

struct BindError : IoError {
    using IoError::IoError;
};

fs::path sibling(const fs::path& of, const char* name) {
    const auto dir = of.parent_path();
    return dir.empty() ? fs::path(name) : dir / name;
}

SnapshotManifest manifest_near(const fs::path& bundle) {
    const auto path = sibling(bundle, "manifest.json");
    if (fs::exists(path)) return parse_manifest(read_text_file(path));
    return {};
}

void write_or_print(const std::string& text, const std::string& out) {
    if (out == "-") {
        std::cout << text;
        return;
    }
    write_text_file(out, text);
}

Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diagnose GNN node classifications: ingest, train, metrics, report, serve."};
    app.footer(kExitHelp);
    app.require_subcommand(1);

    // ingest
    std::string ingest_in, ingest_out;
    std::size_t split_train = 0, split_val = 0;
    std::uint64_t split_seed = 0;
    auto* ingest = app.add_subcommand("ingest", "Validate a dataset file and write it in canonical form.");
    ingest->add_option("input", ingest_in, "Dataset JSON file")->required()->check(CLI::ExistingFile);
    ingest->add_option("-o,--out", ingest_out, "Output path (default: dataset.json next to the input)");
    auto* split_opt = ingest->add_option("--split-train", split_train, "Redraw a class-balanced split with this many train nodes per class");
    ingest->add_option("--split-validation", split_val, "Validation nodes per class for --split-train")->needs(split_opt);
    ingest->add_option("--seed", split_seed, "Seed of the split")->needs(split_opt);

    // synthesize
    SynthesisParams syn;
    std::string syn_out = "dataset.json";
    std::uint64_t syn_seed = 0;
    auto* synth = app.add_subcommand("synthesize", "Write a stochastic-block-model dataset with class-correlated features.");
    synth->add_option("-o,--out", syn_out, "Output path")->capture_default_str();
    synth->add_option("--seed", syn_seed, "Seed")->capture_default_str();
    synth->add_option("--n-per-class", syn.n_per_class)->capture_default_str();
    synth->add_option("--classes", syn.classes)->capture_default_str();
    synth->add_option("--intra", syn.intra_edge_prob, "Edge probability within a class")->capture_default_str();
    synth->add_option("--inter", syn.inter_edge_prob, "Edge probability across classes")->capture_default_str();
    synth->add_option("--feature-dim", syn.feature_dim)->capture_default_str();
    synth->add_option("--feature-noise", syn.feature_noise)->capture_default_str();
    synth->add_option("--train-per-class", syn.train_per_class, "0 = n_per_class / 5");
    synth->add_option("--validation-per-class", syn.validation_per_class, "0 = n_per_class / 5");

    // train
    std::string train_ds, train_out, arch_name = "gcn";
    std::uint64_t train_seed = 0;
    std::size_t train_k = 5;
    TrainConfig cfg;
    std::optional<double> lr;
    auto* train_cmd = app.add_subcommand("train", "Train the GNN, GNNWUF and MLP trio.");
    train_cmd->add_option("-d,--dataset", train_ds, "Dataset JSON")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--arch", arch_name, "gcn or gat")->check(CLI::IsMember({"gcn", "gat"}))->capture_default_str();
    train_cmd->add_option("--seed", train_seed, "Base seed")->capture_default_str();
    train_cmd->add_option("--epochs", cfg.epochs)->capture_default_str();
    train_cmd->add_option("--lr", lr, "Learning rate (default 0.01 for gcn, 0.005 for gat)");
    train_cmd->add_option("--weight-decay", cfg.weight_decay)->capture_default_str();
    train_cmd->add_option("--k", train_k, "Similar training nodes per node, stored in the manifest")->capture_default_str();
    train_cmd->add_option("-o,--out", train_out, "Bundle path (default: bundle.txt next to the dataset)");

    // metrics
    std::string met_ds, met_bundle, met_out;
    std::optional<std::size_t> met_k;
    auto* metrics = app.add_subcommand("metrics", "Compute the per-node metric table as CSV.");
    metrics->add_option("-d,--dataset", met_ds)->required()->check(CLI::ExistingFile);
    metrics->add_option("-b,--bundle", met_bundle)->required()->check(CLI::ExistingFile);
    metrics->add_option("--k", met_k, "Similar training nodes per node (default: manifest, else 5)");
    metrics->add_option("-o,--out", met_out, "CSV path, - for stdout (default: metrics.csv next to the bundle)");

    // report
    std::string rep_ds, rep_bundle, rep_out;
    std::optional<std::uint64_t> rep_seed;
    std::vector<std::string> rep_axes = default_parallel_sets_axes();
    auto* report = app.add_subcommand("report", "Write parallel-sets tallies, projections and layout as JSON files.");
    report->add_option("-d,--dataset", rep_ds)->required()->check(CLI::ExistingFile);
    report->add_option("-b,--bundle", rep_bundle)->required()->check(CLI::ExistingFile);
    report->add_option("--seed", rep_seed, "Base seed (default: manifest next to the bundle, else 0)");
    report->add_option("--axes", rep_axes, "Parallel-sets axes")->delimiter(',')->capture_default_str();
    report->add_option("-o,--out", rep_out, "Output directory (default: report/ next to the bundle)");

    // serve
    std::string srv_snapshot, srv_bind = "127.0.0.1:8080";
    std::optional<std::uint64_t> srv_seed;
    auto* serve = app.add_subcommand("serve", "Serve one snapshot over HTTP.");
    serve->add_option("--snapshot", srv_snapshot, "Snapshot directory (dataset.json, bundle.txt, manifest.json)")
        ->envname("GNNDIAG_SNAPSHOT")
        ->required()
        ->check(CLI::ExistingDirectory);
    serve->add_option("--bind", srv_bind, "host:port")->envname("GNNDIAG_BIND")->capture_default_str();
    serve->add_option("--seed", srv_seed, "Override the manifest seed")->envname("GNNDIAG_SEED");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*ingest) {
            Dataset ds = load_dataset(ingest_in);
            if (*split_opt) ds = class_balanced_split(ds, split_train, split_val, derive_seed(split_seed, "split"));
            const fs::path out = ingest_out.empty() ? sibling(ingest_in, "dataset.json") : fs::path(ingest_out);
            save_dataset(ds, out);
            std::cerr << "ingested " << ds.node_count() << " nodes, " << ds.edge_count() << " edges -> " << out.string() << "\n";
        } else if (*synth) {
            const Dataset ds = synthesize(syn, syn_seed);
            save_dataset(ds, syn_out);
            std::cerr << "synthesized " << ds.node_count() << " nodes, " << ds.edge_count() << " edges -> " << syn_out << "\n";
        } else if (*train_cmd) {
            const Dataset ds = load_dataset(train_ds);
            const Architecture arch = *parse_architecture(arch_name);
            cfg.learning_rate = lr.value_or(arch == Architecture::GAT ? 0.005 : 0.01);
            const auto bundle = train_trio(arch, cfg, ds, derive_seed(train_seed, "train"));
            const fs::path out = train_out.empty() ? sibling(train_ds, "bundle.txt") : fs::path(train_out);
            save_bundle(bundle, out);
            write_text_file(sibling(out, "manifest.json"), serialize_manifest({train_seed, arch, train_k}));
            std::cerr << "test accuracy gnn " << bundle.gnn.accuracy.test << ", gnnwuf " << bundle.gnnwuf.accuracy.test
                      << ", mlp " << bundle.mlp.accuracy.test << "\n";
        } else if (*metrics) {
            const Dataset ds = load_dataset(met_ds);
            const auto bundle = load_bundle(met_bundle);
            check_bundle_matches(bundle, ds);
            const std::size_t k = met_k.value_or(manifest_near(met_bundle).k);
            const auto table = compute_table(ds, bundle, k);
            write_or_print(metrics_to_csv(table), met_out.empty() ? sibling(met_bundle, "metrics.csv").string() : met_out);
        } else if (*report) {
            auto manifest = manifest_near(rep_bundle);
            if (rep_seed) manifest.seed = *rep_seed;
            auto bundle = load_bundle(rep_bundle);
            manifest.architecture = bundle.gnn.spec.architecture;
            Api api(std::make_shared<const Snapshot>(build_snapshot(load_dataset(rep_ds), std::move(bundle), manifest)));
            const fs::path out = rep_out.empty() ? sibling(rep_bundle, "report") : fs::path(rep_out);
            for (const auto& f : write_report(api, out, rep_axes)) std::cerr << (out / f).string() << "\n";
        } else if (*serve) {
            const auto [host, port] = parse_bind_address(srv_bind);
            auto api = std::make_shared<Api>(std::make_shared<const Snapshot>(load_snapshot(srv_snapshot, srv_seed)));
            Server server(api);
            int bound = 0;
            try {
                bound = server.bind(host, port);
            } catch (const IoError& e) {
                throw BindError(e.what());
            }
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "serving " << srv_snapshot << " on http://" << host << ":" << bound << "\n";
            server.listen();
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kParse;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDimension;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    } catch (const BindError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBind;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUnexpected;
    }
    return kOk;
}
