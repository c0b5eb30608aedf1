#include "gnndiag/graph/synthesize.hpp"
#include "gnndiag/models/bundle_io.hpp"
#include "gnndiag/models/network.hpp"
#include "gnndiag/models/train.hpp"

#include "support/dense_oracle.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace gnndiag;
using namespace gnndiag::testing;

namespace {

Parameters seeded_params(const ModelSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    Parameters p = init_parameters(spec, rng);
    for (std::size_t k = 0; k < p.size(); ++k)
        if (p.names[k].find("bias") != std::string::npos)
            for (Eigen::Index c = 0; c < p.tensors[k].cols(); ++c) p.tensors[k](0, c) = uniform(rng, -0.3, 0.3);
    return p;
}

Dataset permuted(const Dataset& ds, const std::vector<NodeId>& perm) {
    // perm[old] = new
    DatasetParts p = to_parts(ds);
    DatasetParts q = p;
    for (auto& e : q.edges) e = {perm[static_cast<std::size_t>(e.first)], perm[static_cast<std::size_t>(e.second)]};
    for (std::size_t i = 0; i < ds.node_count(); ++i) {
        q.features.row(perm[i]) = p.features.row(static_cast<Eigen::Index>(i));
        q.labels[perm[i]] = p.labels[i];
    }
    for (auto* mask : {&q.train, &q.validation, &q.test})
        for (auto& id : *mask) id = perm[static_cast<std::size_t>(id)];
    return Dataset::create(std::move(q));
}

Dataset single_node(const Eigen::RowVectorXd& v) {
    DatasetParts p;
    p.node_count = 1;
    p.features = FeatureMatrix(1, v.size());
    p.features.row(0) = v;
    p.labels = {0};
    p.class_count = 1;
    p.train = {0};
    return Dataset::create(std::move(p));
}

} // namespace

TEST(ForwardGcn, IsolatedNodeWithIdentityWeights) {
    const Eigen::RowVector3d v(0.2, 0.7, 0.0);
    const Dataset ds = single_node(v);
    ModelSpec spec = default_spec(Architecture::GCN, 3, 3);
    spec.layer_sizes[1] = 3;
    Parameters p = init_parameters(spec, *std::make_unique<Rng>(0));
    p.tensors[0] = Matrix::Identity(3, 3);
    p.tensors[1].setZero();
    p.tensors[2] = Matrix::Identity(3, 3);
    p.tensors[3].setZero();
    const Matrix out = forward_gcn(spec, p, PropagationGraph(ds), NodeInputs::dense(ds.features()));
    for (int c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(out(0, c), std::max(0.0, v[c]));
}

TEST(ForwardGcn, SymmetricPairGetsEqualOutputs) {
    DatasetParts p;
    p.node_count = 2;
    p.edges = {{0, 1}};
    p.features = FeatureMatrix(2, 2);
    p.features << 0.3, 0.9, 0.3, 0.9;
    p.labels = {0, 1};
    p.class_count = 2;
    p.train = {0};
    const Dataset ds = Dataset::create(p);
    const ModelSpec spec = default_spec(Architecture::GCN, 2, 2);
    const Matrix out = forward_gcn(spec, seeded_params(spec, 3), PropagationGraph(ds), NodeInputs::dense(ds.features()));
    EXPECT_TRUE(out.row(0).isApprox(out.row(1), 1e-15));
}

TEST(ForwardGcn, K6MatchesDenseOracle) {
    const Dataset ds = k6();
    const ModelSpec spec = default_spec(Architecture::GCN, 3, 2);
    const Parameters p = seeded_params(spec, 0);
    const Matrix out = forward_gcn(spec, p, PropagationGraph(ds), NodeInputs::dense(ds.features()));
    const Matrix ref = dense_gcn(ds, p, ds.features());
    EXPECT_LT((out - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ForwardGat, IsolatedNodeAttendsToItself) {
    const Dataset ds = single_node(Eigen::RowVector2d(0.5, 0.1));
    ModelSpec spec = default_spec(Architecture::GAT, 2, 1);
    const Parameters p = seeded_params(spec, 1);
    const PropagationGraph g(ds);
    const auto alpha = attention_coefficients(spec, p, g, NodeInputs::dense(ds.features()), 1, 0);
    ASSERT_EQ(alpha.size(), 1);
    EXPECT_EQ(alpha[0], 1.0);
}

TEST(ForwardGat, ZeroAttentionVectorIsUniform) {
    const Dataset ds = k6();
    ModelSpec spec = default_spec(Architecture::GAT, 3, 2);
    Parameters p = seeded_params(spec, 2);
    for (std::size_t k = 0; k < p.size(); ++k)
        if (p.names[k].find("att_") != std::string::npos) p.tensors[k].setZero();
    const PropagationGraph g(ds);
    for (std::size_t layer : {1u, 2u}) {
        const auto alpha = attention_coefficients(spec, p, g, NodeInputs::dense(ds.features()), layer, 0);
        for (NodeId i = 0; i < 6; ++i) {
            const double expected = 1.0 / static_cast<double>(ds.degree(i) + 1);
            for (std::size_t e = g.begin(i); e < g.end(i); ++e) EXPECT_NEAR(alpha[e], expected, 1e-15);
        }
    }
}

TEST(ForwardGat, K6AttentionRowsSumToOneAndMatchDenseOracle) {
    const Dataset ds = k6();
    const ModelSpec spec = default_spec(Architecture::GAT, 3, 2);
    const Parameters p = seeded_params(spec, 0);
    const PropagationGraph g(ds);
    const auto inputs = NodeInputs::dense(ds.features());
    for (std::size_t layer : {1u, 2u}) {
        const std::size_t heads = layer == 1 ? spec.gat_heads : spec.gat_output_heads;
        for (std::size_t h = 0; h < heads; ++h) {
            const auto alpha = attention_coefficients(spec, p, g, inputs, layer, h);
            for (NodeId i = 0; i < 6; ++i) {
                double s = 0.0;
                for (std::size_t e = g.begin(i); e < g.end(i); ++e) s += alpha[e];
                EXPECT_NEAR(s, 1.0, 1e-6);
            }
        }
    }
    const Matrix out = forward_gat(spec, p, g, inputs);
    EXPECT_LT((out - dense_gat(ds, spec, p, ds.features())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ForwardMlp, IgnoresEdges) {
    const Dataset ds = k6();
    auto parts = to_parts(ds);
    parts.edges = {{0, 5}, {1, 4}, {2, 3}};
    const Dataset rewired = Dataset::create(parts);
    const ModelSpec spec = default_spec(Architecture::MLP, 3, 2);
    const Parameters p = seeded_params(spec, 4);
    const Matrix a = forward(spec, p, PropagationGraph(ds), NodeInputs::dense(ds.features()));
    const Matrix b = forward(spec, p, PropagationGraph(rewired), NodeInputs::dense(rewired.features()));
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, forward_mlp(spec, p, NodeInputs::dense(ds.features())));
}

TEST(ForwardMlp, ZeroWeightsGiveUniformProbabilities) {
    const Dataset ds = k6();
    const ModelSpec spec = default_spec(Architecture::MLP, 3, 2);
    const Parameters p = seeded_params(spec, 4).zeros_like();
    const auto pred = PredictionSet::from_logits(forward_mlp(spec, p, NodeInputs::dense(ds.features())));
    for (NodeId i = 0; i < 6; ++i) {
        EXPECT_DOUBLE_EQ(pred.confidence[i], 0.5);
        EXPECT_EQ(pred.labels[i], 0);  // tie goes to the lowest class id
    }
}

TEST(ForwardMlp, K6MatchesDenseOracle) {
    const Dataset ds = k6();
    const ModelSpec spec = default_spec(Architecture::MLP, 3, 2);
    const Parameters p = seeded_params(spec, 0);
    const Matrix out = forward_mlp(spec, p, NodeInputs::dense(ds.features()));
    EXPECT_LT((out - dense_mlp(p, ds.features())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Forward, DimensionMismatch) {
    const Dataset ds = k6();
    const ModelSpec spec = default_spec(Architecture::GCN, 4, 2);
    Rng rng(0);
    const Parameters p = init_parameters(spec, rng);
    EXPECT_THROW(forward(spec, p, PropagationGraph(ds), NodeInputs::dense(ds.features())), DimensionError);
    const ModelSpec ok = default_spec(Architecture::GCN, 3, 2);
    EXPECT_THROW(forward(ok, p, PropagationGraph(ds), NodeInputs::dense(ds.features())), DimensionError);
}

TEST(OneHotInputs, IdentityRows) {
    EXPECT_EQ(one_hot_inputs(single_node(Eigen::RowVector2d(0, 0))), Matrix::Identity(1, 1));
    auto parts = k6_parts();
    const Matrix m = one_hot_inputs(Dataset::create(parts));
    EXPECT_EQ(m, Matrix::Identity(6, 6));
    for (Eigen::Index r = 0; r < m.rows(); ++r) EXPECT_EQ(m.row(r).sum(), 1.0);
}

TEST(OneHotInputs, ImplicitIdentityMatchesDenseOneHot) {
    const Dataset ds = k6();
    for (auto arch : {Architecture::GCN, Architecture::GAT}) {
        ModelSpec spec = default_spec(arch, 6, 2);
        spec.use_one_hot_inputs = true;
        const Parameters p = seeded_params(spec, 5);
        const Matrix dense_x = one_hot_inputs(ds);
        const PropagationGraph g(ds);
        const Matrix a = forward(spec, p, g, NodeInputs::identity(6));
        const Matrix b = forward(spec, p, g, NodeInputs::dense(dense_x));
        EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-14);
        const auto ga = gradients(spec, p, g, NodeInputs::identity(6), ds.labels(), ds.train_ids());
        const auto gb = gradients(spec, p, g, NodeInputs::dense(dense_x), ds.labels(), ds.train_ids());
        for (std::size_t k = 0; k < p.size(); ++k)
            EXPECT_LT((ga.gradients.tensors[k] - gb.gradients.tensors[k]).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Gradients, ZeroLearningSignal) {
    auto parts = k6_parts();
    parts.train = {0, 1};  // both class 0
    parts.validation = {};
    parts.test = {2, 3, 4, 5};
    const Dataset ds = Dataset::create(parts);
    for (auto arch : {Architecture::GCN, Architecture::MLP}) {
        const ModelSpec spec = default_spec(arch, 3, 2);
        Parameters p = seeded_params(spec, 6);
        p.tensors[2].setZero();
        p.tensors[3](0, 0) = 800.0;
        p.tensors[3](0, 1) = -800.0;
        const auto g = gradients(spec, p, ds, NodeInputs::dense(ds.features()), ds.train_ids());
        EXPECT_LT(std::sqrt(g.gradients.squared_norm()), 1e-8);
    }
}

TEST(Gradients, MatchFiniteDifferences) {
    Rng rng(99);
    for (auto arch : {Architecture::GCN, Architecture::GAT, Architecture::MLP}) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto inst = random_instance(arch, rng);
            const auto res = finite_difference_check(inst, 20, 1e-4, rng);
            EXPECT_EQ(res.probes, 20u);
            EXPECT_LT(res.max_relative_error, 1e-4) << to_string(arch) << " trial " << trial;
        }
    }
}

TEST(Gradients, ScaleByTwoIsExact) {
    Rng rng(5);
    for (auto arch : {Architecture::GCN, Architecture::GAT, Architecture::MLP}) {
        const auto inst = random_instance(arch, rng);
        const PropagationGraph g(inst.dataset);
        const auto in = NodeInputs::dense(inst.dataset.features());
        const auto one = gradients(inst.spec, inst.params, g, in, inst.dataset.labels(), inst.dataset.train_ids(), 1.0);
        const auto two = gradients(inst.spec, inst.params, g, in, inst.dataset.labels(), inst.dataset.train_ids(), 2.0);
        for (std::size_t k = 0; k < one.gradients.size(); ++k)
            EXPECT_EQ(two.gradients.tensors[k], (2.0 * one.gradients.tensors[k]).eval());
    }
}

TEST(ModelProperties, SoftmaxRowsAndShiftInvariance) {
    Rng rng(8);
    Matrix logits(30, 5);
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = uniform(rng, -20, 20);
    const auto a = PredictionSet::from_logits(logits);
    const auto b = PredictionSet::from_logits((logits.array() + 123.0).matrix());
    for (Eigen::Index r = 0; r < 30; ++r) {
        EXPECT_NEAR(a.probabilities.row(r).sum(), 1.0, 1e-6);
        EXPECT_GE(a.confidence[static_cast<std::size_t>(r)], 1.0 / 5.0);
    }
    EXPECT_EQ(a.labels, b.labels);
}

TEST(ModelProperties, GnnwufIgnoresFeatures) {
    const Dataset ds = k6();
    auto parts = to_parts(ds);
    parts.features.setConstant(0.25);
    const Dataset other = Dataset::create(parts);
    const auto specs = trio_specs(Architecture::GCN, ds);
    TrainConfig cfg;
    cfg.epochs = 20;
    const auto a = train(specs[1], cfg, ds);
    const auto b = train(specs[1], cfg, other);
    EXPECT_EQ(a.params, b.params);
    EXPECT_EQ(a.predictions.labels, b.predictions.labels);
    EXPECT_EQ(a.predictions.probabilities, b.predictions.probabilities);
}

TEST(ModelProperties, PermutationEquivariance) {
    Rng rng(17);
    const Dataset ds = synthesize({.n_per_class = 6, .classes = 2, .intra_edge_prob = 0.5, .inter_edge_prob = 0.1,
                                   .feature_dim = 4, .feature_noise = 0.2},
                                  3);
    std::vector<NodeId> perm(ds.node_count());
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(perm.begin(), perm.end(), rng);
    const Dataset pd = permuted(ds, perm);
    for (auto arch : {Architecture::GCN, Architecture::GAT}) {
        const ModelSpec spec = default_spec(arch, 4, 2);
        const Parameters p = seeded_params(spec, 21);
        const Matrix a = forward(spec, p, PropagationGraph(ds), NodeInputs::dense(ds.features()));
        const Matrix b = forward(spec, p, PropagationGraph(pd), NodeInputs::dense(pd.features()));
        for (NodeId i = 0; i < ds.node_count(); ++i)
            EXPECT_LT((a.row(i) - b.row(perm[i])).cwiseAbs().maxCoeff(), 1e-12) << to_string(arch);
    }
}

// Softmax regression on fixed inputs: a convex objective.
TEST(ModelProperties, ConvexLastLayerLossNonIncreasingOverWindows) {
    const Dataset ds = synthesize({.n_per_class = 30, .classes = 3, .intra_edge_prob = 0.0, .inter_edge_prob = 0.0,
                                   .feature_dim = 6, .feature_noise = 0.3},
                                  4);
    Rng rng(1);
    Parameters p;
    p.names = {"weight", "bias"};
    p.tensors = {Matrix::Zero(6, 3), Matrix::Zero(1, 3)};
    for (Eigen::Index i = 0; i < p.tensors[0].size(); ++i) p.tensors[0].data()[i] = uniform(rng, -0.5, 0.5);
    Adam adam(p, 0.01);
    std::vector<double> losses;
    for (int epoch = 0; epoch < 300; ++epoch) {
        Matrix logits = ds.features() * p.tensors[0];
        logits.rowwise() += p.tensors[1].row(0);
        const auto lg = softmax_cross_entropy(logits, ds.labels(), ds.train_ids());
        losses.push_back(lg.loss);
        Parameters g = p.zeros_like();
        g.tensors[0] = ds.features().transpose() * lg.d_logits;
        g.tensors[1] = lg.d_logits.colwise().sum();
        adam.step(p, g);
    }
    for (std::size_t t = 0; t + 10 < losses.size(); ++t) EXPECT_LE(losses[t + 10], losses[t]) << "epoch " << t;
}

TEST(Train, TwoCliquesReachFullTestAccuracy) {
    const Dataset ds = synthesize({.n_per_class = 20, .classes = 2, .intra_edge_prob = 1.0, .inter_edge_prob = 0.0,
                                   .feature_dim = 8, .feature_noise = 0.0},
                                  1);
    // Brute-force nearest-class-mean classifier on train nodes: confirms the
    // fixture is separable.
    Matrix means = Matrix::Zero(2, 8);
    std::array<double, 2> counts{};
    for (NodeId i : ds.train_ids()) {
        means.row(ds.label(i)) += ds.features().row(i);
        counts[static_cast<std::size_t>(ds.label(i))] += 1;
    }
    for (int c = 0; c < 2; ++c) means.row(c) /= counts[static_cast<std::size_t>(c)];
    for (NodeId i : subset_mask(ds, Subset::Test)) {
        const double d0 = (ds.features().row(i) - means.row(0)).squaredNorm();
        const double d1 = (ds.features().row(i) - means.row(1)).squaredNorm();
        ASSERT_EQ(d0 < d1 ? 0 : 1, ds.label(i));
    }

    const auto model = train(default_spec(Architecture::GCN, 8, 2), TrainConfig{}, ds);
    EXPECT_EQ(model.accuracy.test, 1.0);
    EXPECT_EQ(model.loss_history.size(), 200u);
}

TEST(Train, DeterministicGivenSeed) {
    const Dataset ds = k6();
    for (auto arch : {Architecture::GCN, Architecture::GAT, Architecture::MLP}) {
        TrainConfig cfg;
        cfg.epochs = 30;
        cfg.seed = 42;
        const ModelSpec spec = default_spec(arch, 3, 2);
        const auto a = train(spec, cfg, ds);
        const auto b = train(spec, cfg, ds);
        EXPECT_EQ(a.params, b.params);
        EXPECT_EQ(a.loss_history, b.loss_history);
    }
}

TEST(Train, NonFiniteLossAborts) {
    const Dataset ds = k6();
    TrainConfig cfg;
    cfg.learning_rate = 1e308;
    cfg.epochs = 10;
    try {
        train(default_spec(Architecture::GCN, 3, 2), cfg, ds);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_GE(e.epoch(), 1u);
        EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
    }
}

TEST(Train, RejectsMismatchedSpec) {
    EXPECT_THROW(train(default_spec(Architecture::GCN, 5, 2), TrainConfig{}, k6()), DimensionError);
    TrainConfig bad;
    bad.epochs = 0;
    EXPECT_THROW(train(default_spec(Architecture::GCN, 3, 2), bad, k6()), Error);
}

TEST(Bundle, TrioSerializationIsStable) {
    const Dataset ds = k6();
    TrainConfig cfg;
    cfg.epochs = 15;
    const auto bundle = train_trio(Architecture::GAT, cfg, ds, 9);
    EXPECT_TRUE(bundle.gnnwuf.spec.use_one_hot_inputs);
    EXPECT_EQ(bundle.mlp.spec.architecture, Architecture::MLP);
    EXPECT_EQ(bundle.mlp.spec.hidden_width(), bundle.gnn.spec.hidden_width());
    const std::string text = serialize_bundle(bundle);
    const auto back = parse_bundle(text);
    EXPECT_EQ(back.gnn.params, bundle.gnn.params);
    EXPECT_EQ(back.mlp.predictions.probabilities, bundle.mlp.predictions.probabilities);
    EXPECT_EQ(serialize_bundle(back), text);
    // Stored predictions agree with a fresh evaluation of the stored weights.
    EXPECT_EQ(predict(back.gnn.spec, back.gnn.params, ds).labels, bundle.gnn.predictions.labels);
    EXPECT_EQ(serialize_bundle(train_trio(Architecture::GAT, cfg, ds, 9)), text);
    EXPECT_THROW(parse_bundle("{}"), ParseError);
}
