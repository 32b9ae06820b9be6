#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <numeric>

#include "egograph/errors.hpp"
#include "egograph/grad_check.hpp"
#include "egograph/model.hpp"
#include "egograph/synth.hpp"
#include "oracles.hpp"

using namespace egograph;
namespace fs = std::filesystem;

namespace {

ModelConfig desk_config() {
    ModelConfig cfg;
    cfg.k_neighbors = 3;
    cfg.layers = 2;
    cfg.filters = 4;
    cfg.node_budget = 8;
    cfg.dense_sizes = {6};
    cfg.dropout_rate = 0.0;
    cfg.batch_norm = true;
    cfg.activation = Activation::tanh;
    cfg.learning_rate = 1e-3;
    cfg.epochs = 5;
    cfg.batch_size = 4;
    cfg.patience = 0;
    cfg.seed = 3;
    return cfg;
}

// easily separable toy task: triangles-with-tails vs paths
Dataset toy_dataset(int per_class, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Dataset d;
    d.name = "toy";
    for (int i = 0; i < per_class; ++i) {
        const int extra = static_cast<int>(rng() % 4);
        std::vector<std::pair<NodeId, NodeId>> tri{{0, 1}, {1, 2}, {0, 2}};
        for (int t = 0; t < extra; ++t) tri.emplace_back(2 + t, 3 + t);
        d.graphs.emplace_back(3 + extra, tri);
        d.class_labels.push_back(0);

        const int n = 4 + static_cast<int>(rng() % 4);
        std::vector<std::pair<NodeId, NodeId>> path;
        for (int u = 0; u + 1 < n; ++u) path.emplace_back(u, u + 1);
        d.graphs.emplace_back(n, path);
        d.class_labels.push_back(1);
    }
    return d;
}

}  // namespace

TEST_CASE("parameter counting") {
    SUBCASE("closed form matches a runtime enumeration") {
        std::vector<ModelConfig> cfgs;
        ModelConfig a = desk_config();
        cfgs.push_back(a);
        ModelConfig b = desk_config();
        b.front_end = FrontEnd::patchy_san;
        b.patchy_k = 4;
        b.patchy_filters = 5;
        cfgs.push_back(b);
        ModelConfig c = desk_config();
        c.filters = c.k_neighbors;  // tie-able
        c.tied = true;
        c.layers = 4;
        cfgs.push_back(c);
        for (const auto& cfg : cfgs) {
            Model m = Model::build(cfg, 3, 7);
            CHECK(m.parameter_count() == expected_parameter_count(cfg, 3));
        }
    }

    SUBCASE("untied L=5 minus L=1 at K=16, D=128") {
        ModelConfig big;
        big.k_neighbors = 16;
        big.filters = 128;
        big.node_budget = 64;
        big.layers = 5;
        ModelConfig small = big;
        small.layers = 1;
        // closed form: four extra D x (K+1) x D filter banks plus biases
        const std::size_t diff =
            expected_parameter_count(big, 2) - expected_parameter_count(small, 2);
        CHECK(diff == 4u * (128u * 17u * 128u + 128u));
        CHECK(diff == 1114624u);
    }

    SUBCASE("tied and untied coincide at L=1") {
        ModelConfig u = desk_config();
        u.filters = u.k_neighbors;
        u.layers = 1;
        ModelConfig t = u;
        t.tied = true;
        CHECK(expected_parameter_count(u, 2) == expected_parameter_count(t, 2));
    }

    SUBCASE("tied L=5 equals L=1") {
        ModelConfig t = desk_config();
        t.filters = t.k_neighbors;
        t.tied = true;
        t.layers = 5;
        ModelConfig one = t;
        one.layers = 1;
        CHECK(expected_parameter_count(t, 2) == expected_parameter_count(one, 2));
        Model m = Model::build(t, 2, 1);
        CHECK(m.parameter_count() == expected_parameter_count(one, 2));
    }

    SUBCASE("tied config with mismatched width is rejected") {
        ModelConfig bad = desk_config();
        bad.tied = true;  // k_neighbors=3 != filters=4
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        CHECK_THROWS_AS(Model::build(bad, 2, 1), ConfigError);
    }
}

TEST_CASE("same seed builds bit-identical models") {
    const ModelConfig cfg = desk_config();
    Model a = Model::build(cfg, 2, 99);
    Model b = Model::build(cfg, 2, 99);
    Model c = Model::build(cfg, 2, 100);
    const auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
    REQUIRE(pa.size() == pb.size());
    bool all_equal = true, any_diff_c = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        all_equal = all_equal && pa[i].values() == pb[i].values();
        any_diff_c = any_diff_c || pa[i].values() != pc[i].values();
    }
    CHECK(all_equal);
    CHECK(any_diff_c);
}

TEST_CASE("zero-initialized task head gives uniform logits") {
    const ModelConfig cfg = desk_config();
    Model m = Model::build(cfg, 3, 5);
    // zero the dense head
    for (Tensor& p : m.parameters()) {
        if (p.rank() == 2 && p.dim(1) == 3) {
            for (double& v : p.values()) v = 0.0;
        }
        if (p.rank() == 1 && p.dim(0) == 3) {
            for (double& v : p.values()) v = 0.0;
        }
    }
    std::mt19937_64 rng(5);
    Graph g = oracles::random_graph(7, 0.4, rng);
    const auto f = GraphFeatures::compute(g, cfg);
    Tape tape;
    const Tensor logits = m.forward(tape, f, false);
    for (double v : logits.values()) CHECK(v == doctest::Approx(logits.values()[0]));
}

TEST_CASE("forward rejects empty graphs") {
    const ModelConfig cfg = desk_config();
    CHECK_THROWS_AS(GraphFeatures::compute(Graph(0, {}), cfg), ArgumentError);
}

TEST_CASE("isomorphic graphs with discrete colorings get identical logits") {
    // the asymmetric tree refines to all-distinct colors
    Graph g(7, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {2, 6}});
    ModelConfig cfg = desk_config();
    cfg.wl_iterations = 4;
    cfg.node_budget = 7;
    REQUIRE(wl_refine(g, cfg.wl_iterations).color_count(cfg.wl_iterations) == 7);

    Model m = Model::build(cfg, 2, 17);
    const auto f = GraphFeatures::compute(g, cfg);
    Tape tape;
    const Tensor base = m.forward(tape, f, false);

    std::mt19937_64 rng(23);
    std::vector<NodeId> perm(7);
    std::iota(perm.begin(), perm.end(), 0);
    for (int trial = 0; trial < 8; ++trial) {
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::pair<NodeId, NodeId>> edges;
        for (auto [u, v] : g.edges()) edges.emplace_back(perm[u], perm[v]);
        Graph h(7, edges);
        const auto fh = GraphFeatures::compute(h, cfg);
        Tape t2;
        const Tensor out = m.forward(t2, fh, false);
        for (std::size_t i = 0; i < out.size(); ++i) {
            CHECK(out.values()[i] == doctest::Approx(base.values()[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("locality probe: nodes outside every kept receptive field cannot move logits") {
    // long path, tiny budget, batch norm off so the only coupling is the stack
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (int i = 0; i + 1 < 16; ++i) edges.emplace_back(i, i + 1);
    Graph g(16, edges);

    ModelConfig cfg = desk_config();
    cfg.batch_norm = false;
    cfg.layers = 2;
    cfg.k_neighbors = 2;
    cfg.node_budget = 1;
    Model m = Model::build(cfg, 2, 31);

    const auto f = GraphFeatures::compute(g, cfg);
    const NodeId kept = f.ranking[0];
    const auto field = receptive_field(f.table, kept, cfg.layers);
    const std::set<NodeId> covered(field.begin(), field.end());
    REQUIRE(covered.size() < 16u);

    Tape tape;
    const Tensor base = m.forward(tape, f, false);
    for (NodeId n = 0; n < 16; ++n) {
        GraphFeatures probe = f;
        probe.h0 = f.h0.clone();
        probe.h0.values()[static_cast<std::size_t>(n) * cfg.k_neighbors] += 0.75;
        Tape t2;
        const Tensor out = m.forward(t2, probe, false);
        const bool inside = covered.count(n) > 0;
        bool changed = false;
        for (std::size_t i = 0; i < out.size(); ++i) {
            changed = changed || out.values()[i] != base.values()[i];
        }
        if (!inside) CHECK(!changed);
    }
}

TEST_CASE("end-to-end gradient of the 2-layer desk model") {
    // weighted graph keeps batch-norm variances honest (see layers test)
    std::mt19937_64 rng(41);
    std::vector<std::pair<NodeId, NodeId>> edges;
    std::vector<double> weights;
    std::uniform_real_distribution<double> wdist(0.5, 1.5);
    for (NodeId u = 0; u < 9; ++u) {
        for (NodeId v = u + 1; v < 9; ++v) {
            if (rng() % 5 < 3) {
                edges.emplace_back(u, v);
                weights.push_back(wdist(rng));
            }
        }
    }
    Graph g(9, edges, std::nullopt, weights);
    ModelConfig cfg = desk_config();
    Model m = Model::build(cfg, 2, 43);
    const auto f = GraphFeatures::compute(g, cfg);

    auto loss = [&](Tape& t) {
        Tensor logits = m.forward(t, f, /*train=*/false);
        return t.softmax_cross_entropy(t.reshape(logits, {2}), 1);
    };
    const auto report = finite_diff_check(loss, m.parameters());
    CHECK(report.max_rel_err < 1e-5);
}

TEST_CASE("training") {
    SUBCASE("overfits a 20-graph toy set within 200 epochs") {
        Dataset d = toy_dataset(10, 7);
        ModelConfig cfg = desk_config();
        cfg.filters = 8;
        cfg.dense_sizes = {16};
        cfg.node_budget = resolve_node_budget(d);
        cfg.learning_rate = 1e-2;
        cfg.epochs = 200;
        cfg.patience = 0;
        Model m = Model::build(cfg, d.class_count(), cfg.seed);

        std::vector<GraphFeatures> feats;
        std::vector<const GraphFeatures*> set;
        for (const auto& g : d.graphs) feats.push_back(GraphFeatures::compute(g, cfg));
        for (const auto& f : feats) set.push_back(&f);

        const auto curves = train_model(m, set, d.class_labels, {}, {});
        CHECK(evaluate_accuracy(m, set, d.class_labels) == 1.0);
        bool reached = false;
        for (const auto& p : curves.train) reached = reached || p.accuracy == 1.0;
        CHECK(reached);
    }

    SUBCASE("learning rate zero leaves parameters untouched") {
        Dataset d = toy_dataset(4, 9);
        ModelConfig cfg = desk_config();
        cfg.learning_rate = 0.0;
        cfg.epochs = 3;
        cfg.node_budget = 6;
        Model m = Model::build(cfg, 2, 11);
        std::vector<GraphFeatures> feats;
        std::vector<const GraphFeatures*> set;
        for (const auto& g : d.graphs) feats.push_back(GraphFeatures::compute(g, cfg));
        for (const auto& f : feats) set.push_back(&f);
        const auto before = m.parameters();
        std::vector<std::vector<double>> saved;
        for (const auto& p : before) saved.push_back(p.values());
        train_model(m, set, d.class_labels, {}, {});
        const auto after = m.parameters();
        for (std::size_t i = 0; i < after.size(); ++i) {
            CHECK(after[i].values() == saved[i]);
        }
    }

    SUBCASE("non-finite loss raises a training error") {
        Dataset d = toy_dataset(4, 13);
        ModelConfig cfg = desk_config();
        cfg.node_budget = 6;
        cfg.epochs = 2;
        Model m = Model::build(cfg, 2, 13);
        m.parameters()[0].values()[0] = std::numeric_limits<double>::quiet_NaN();
        std::vector<GraphFeatures> feats;
        std::vector<const GraphFeatures*> set;
        for (const auto& g : d.graphs) feats.push_back(GraphFeatures::compute(g, cfg));
        for (const auto& f : feats) set.push_back(&f);
        CHECK_THROWS_AS(train_model(m, set, d.class_labels, {}, {}), TrainingError);
    }

    SUBCASE("needs two classes") {
        Dataset d = toy_dataset(3, 15);
        ModelConfig cfg = desk_config();
        cfg.node_budget = 6;
        Model m = Model::build(cfg, 2, 15);
        std::vector<GraphFeatures> feats;
        std::vector<const GraphFeatures*> set;
        for (const auto& g : d.graphs) feats.push_back(GraphFeatures::compute(g, cfg));
        for (const auto& f : feats) set.push_back(&f);
        const std::vector<int> one_class(set.size(), 0);
        CHECK_THROWS_AS(train_model(m, set, one_class, {}, {}), ArgumentError);
    }
}

TEST_CASE("cross-validation") {
    SUBCASE("ten graphs, ten folds: one test graph each") {
        Dataset d = toy_dataset(5, 17);  // 10 graphs, 5 per class
        ModelConfig cfg = desk_config();
        cfg.epochs = 3;
        CVOptions opt;
        opt.folds = 10;
        const auto report = cross_validate(cfg, d, opt);
        CHECK(report.fold_accuracies.size() == 10);
        // every fold held out exactly one graph: accuracies are 0 or 1
        for (double a : report.fold_accuracies) CHECK((a == 0.0 || a == 1.0));
    }

    SUBCASE("seeded determinism of the full report") {
        Dataset d = toy_dataset(6, 19);
        ModelConfig cfg = desk_config();
        cfg.epochs = 4;
        CVOptions opt;
        opt.folds = 3;
        const auto a = cross_validate(cfg, d, opt);
        const auto b = cross_validate(cfg, d, opt);
        CHECK(a.metrics_csv == b.metrics_csv);
        CHECK(a.fold_accuracies == b.fold_accuracies);
        CHECK(a.summary_line == b.summary_line);
    }

    SUBCASE("warning when a fold cannot hold every class") {
        Dataset d;
        d.name = "skew";
        std::mt19937_64 rng(3);
        for (int i = 0; i < 10; ++i) {
            d.graphs.push_back(oracles::random_graph(6, 0.4, rng));
            d.class_labels.push_back(0);
        }
        d.graphs.push_back(oracles::random_graph(6, 0.4, rng));
        d.class_labels.push_back(1);
        d.graphs.push_back(oracles::random_graph(6, 0.4, rng));
        d.class_labels.push_back(1);
        ModelConfig cfg = desk_config();
        cfg.epochs = 1;
        CVOptions opt;
        opt.folds = 4;
        const auto report = cross_validate(cfg, d, opt);
        CHECK(!report.warnings.empty());
    }

    SUBCASE("fold count must fit the dataset") {
        Dataset d = toy_dataset(2, 21);
        ModelConfig cfg = desk_config();
        CVOptions opt;
        opt.folds = 11;
        CHECK_THROWS_AS(cross_validate(cfg, d, opt), ArgumentError);
    }
}

TEST_CASE("model save/load round trip") {
    const ModelConfig cfg = desk_config();
    Model m = Model::build(cfg, 2, 51);
    const auto dir = fs::temp_directory_path() / "egograph_model_rt";
    fs::create_directories(dir);
    const auto path = dir / "m.model";
    m.save(path);
    Model back = Model::load(path);

    const auto pa = m.parameters(), pb = back.parameters();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i].values() == pb[i].values());
    CHECK(back.class_count() == 2);
    CHECK(config_to_text(back.config()) == config_to_text(cfg));

    std::mt19937_64 rng(7);
    Graph g = oracles::random_graph(9, 0.4, rng);
    const auto f = GraphFeatures::compute(g, cfg);
    CHECK(m.predict(f) == back.predict(f));
    fs::remove_all(dir);
}
