#include "egograph/model.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "egograph/adam.hpp"
#include "egograph/errors.hpp"

namespace egograph {

GraphFeatures GraphFeatures::compute(const Graph& g, const ModelConfig& cfg) {
    if (g.node_count() == 0) throw ArgumentError("cannot featurize an empty graph");
    GraphFeatures f;
    f.graph = &g;
    f.coloring = wl_refine(g, cfg.wl_iterations);

    const bool patchy = cfg.front_end == FrontEnd::patchy_san;
    const int k_wide = std::max(cfg.k_neighbors, patchy ? cfg.patchy_k : 1);
    NeighborTable wide = select_neighbors(g, k_wide, f.coloring);

    // the ego table is a slot prefix of the wide table; ranking is shared
    f.table = NeighborTable(g.node_count(), cfg.k_neighbors);
    for (NodeId n = 0; n < g.node_count(); ++n) {
        for (int s = 0; s < cfg.k_neighbors && s < k_wide; ++s) {
            f.table.set_slot(n, s, wide.slot(n, s));
        }
    }
    f.h0 = initial_embedding(g, f.table);
    if (patchy) {
        f.patchy_stack = patchy_adjacency_stack(g, wide, cfg.patchy_k);
    }
    f.ranking = global_node_ranking(g, f.coloring);
    return f;
}

namespace {

Tensor glorot(std::vector<int> shape, int fan_in, int fan_out, std::mt19937_64& rng) {
    Tensor t = Tensor::zeros(std::move(shape), /*requires_grad=*/true);
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : t.values()) v = dist(rng);
    return t;
}

}  // namespace

Model Model::build(const ModelConfig& cfg, int class_count, std::uint64_t seed) {
    cfg.validate();
    if (class_count < 2) throw ConfigError("classifier needs at least 2 classes");
    if (cfg.node_budget < 1) {
        throw ConfigError("node_budget must be resolved (> 0) before building a model");
    }

    Model m;
    m.cfg_ = cfg;
    m.class_count_ = class_count;

    std::mt19937_64 rng(seed);
    if (cfg.front_end == FrontEnd::patchy_san) {
        m.patchy_ = PatchySanLayer::init(cfg.patchy_k, cfg.patchy_filters, rng);
    }
    m.stack_ = EgoStack::build(cfg.layers, cfg.k_neighbors, cfg.stack_input_width(), cfg.filters,
                               cfg.tied, rng);
    m.bn_states_ = std::make_shared<std::vector<BatchNormState>>(cfg.layers + 1);

    int in = cfg.node_budget * cfg.filters;
    for (int hidden : cfg.dense_sizes) {
        m.dense_weights_.push_back(glorot({in, hidden}, in, hidden, rng));
        m.dense_biases_.push_back(Tensor::zeros({hidden}, /*requires_grad=*/true));
        in = hidden;
    }
    m.dense_weights_.push_back(glorot({in, class_count}, in, class_count, rng));
    m.dense_biases_.push_back(Tensor::zeros({class_count}, /*requires_grad=*/true));
    return m;
}

std::vector<Tensor> Model::parameters() const {
    std::vector<Tensor> out;
    std::set<const TensorImpl*> seen;
    const auto push = [&](const Tensor& t) {
        if (t.defined() && seen.insert(t.impl()).second) out.push_back(t);
    };
    if (patchy_) {
        push(patchy_->filters);
        push(patchy_->bias);
    }
    for (const EgoConvLayer& l : stack_.layers) {
        push(l.filters);
        push(l.bias);
    }
    for (std::size_t i = 0; i < dense_weights_.size(); ++i) {
        push(dense_weights_[i]);
        push(dense_biases_[i]);
    }
    return out;
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (const Tensor& t : parameters()) n += t.size();
    return n;
}

std::size_t expected_parameter_count(const ModelConfig& cfg, int class_count) {
    std::size_t n = 0;
    if (cfg.front_end == FrontEnd::patchy_san) {
        n += static_cast<std::size_t>(cfg.patchy_filters) * cfg.patchy_k * cfg.patchy_k +
             cfg.patchy_filters;
    }
    const std::size_t d = cfg.filters;
    const std::size_t k1 = cfg.k_neighbors + 1;
    const std::size_t first = d * k1 * cfg.stack_input_width() + d;
    const std::size_t rest = d * k1 * d + d;
    n += cfg.tied ? rest : first + (cfg.layers - 1) * rest;
    std::size_t in = static_cast<std::size_t>(cfg.node_budget) * d;
    for (int hidden : cfg.dense_sizes) {
        n += in * hidden + hidden;
        in = hidden;
    }
    n += in * class_count + class_count;
    return n;
}

int resolve_node_budget(const Dataset& data) {
    if (data.graphs.empty()) throw ArgumentError("empty dataset");
    std::vector<int> counts;
    counts.reserve(data.graphs.size());
    for (const Graph& g : data.graphs) counts.push_back(g.node_count());
    std::sort(counts.begin(), counts.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(counts.size())));
    const std::size_t idx = std::min(counts.size() - 1, rank > 0 ? rank - 1 : 0);
    return std::max(1, counts[idx]);
}

Tensor Model::forward(Tape& tape, const GraphFeatures& f, bool train, std::mt19937_64* rng,
                      std::vector<Tensor>* layer_outputs) const {
    if (f.graph == nullptr || f.graph->node_count() == 0) {
        throw ArgumentError("forward needs a non-empty featurized graph");
    }

    Tensor x;
    if (cfg_.front_end == FrontEnd::patchy_san) {
        Tensor z = tape.frobenius_batch(f.patchy_stack, patchy_->filters);
        x = apply_activation(tape, tape.add_bias(z, patchy_->bias), cfg_.activation);
    } else {
        x = f.h0;
    }

    StackRuntime rt;
    rt.train = train;
    rt.dropout_rate = cfg_.dropout_rate;
    rt.batch_norm = cfg_.batch_norm;
    rt.activation = cfg_.activation;
    rt.rng = rng;
    rt.bn_states = bn_states_.get();
    rt.update_running = train;
    std::vector<Tensor> hs = stack_forward(tape, x, f.table, stack_, rt);
    if (layer_outputs) *layer_outputs = hs;

    // fixed-size readout: top node_budget rows by the global ranking
    std::span<const NodeId> order(f.ranking.data(),
                                  std::min<std::size_t>(f.ranking.size(),
                                                        static_cast<std::size_t>(cfg_.node_budget)));
    Tensor rows = tape.gather_rows(hs.back(), order, cfg_.node_budget);
    Tensor h = tape.reshape(rows, {1, cfg_.node_budget * cfg_.filters});
    for (std::size_t i = 0; i < dense_weights_.size(); ++i) {
        h = tape.add_bias(tape.matmul(h, dense_weights_[i]), dense_biases_[i]);
        if (i + 1 < dense_weights_.size()) h = apply_activation(tape, h, cfg_.activation);
    }
    return h;
}

int Model::predict(const GraphFeatures& f) const {
    Tape tape;
    Tensor logits = forward(tape, f, /*train=*/false);
    const auto& v = logits.values();
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

double evaluate_accuracy(const Model& model, const std::vector<const GraphFeatures*>& set,
                         const std::vector<int>& labels) {
    if (set.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (model.predict(*set[i]) == labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(set.size());
}

namespace {

struct EvalResult {
    double loss;
    double accuracy;
};

EvalResult evaluate(const Model& m, const std::vector<const GraphFeatures*>& set,
                    const std::vector<int>& labels) {
    double loss = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        Tape tape;
        Tensor logits = m.forward(tape, *set[i], /*train=*/false);
        Tensor l = tape.softmax_cross_entropy(tape.reshape(logits, {m.class_count()}), labels[i]);
        loss += l.value();
        const auto& v = logits.values();
        if (static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin()) == labels[i]) ++hits;
    }
    const double n = static_cast<double>(set.size());
    return {loss / n, static_cast<double>(hits) / n};
}

std::vector<Tensor> snapshot(const std::vector<Tensor>& params) {
    std::vector<Tensor> copy;
    copy.reserve(params.size());
    for (const Tensor& p : params) copy.push_back(p.clone());
    return copy;
}

void restore(std::vector<Tensor>& params, const std::vector<Tensor>& saved) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        params[i].values() = saved[i].values();
    }
}

}  // namespace

TrainCurves train_model(Model& model, const std::vector<const GraphFeatures*>& train_set,
                        const std::vector<int>& train_labels,
                        const std::vector<const GraphFeatures*>& valid_set,
                        const std::vector<int>& valid_labels) {
    if (train_set.empty() || train_set.size() != train_labels.size()) {
        throw ArgumentError("training set and labels must be non-empty and aligned");
    }
    {
        std::set<int> classes(train_labels.begin(), train_labels.end());
        if (classes.size() < 2) throw ArgumentError("training set must contain at least 2 classes");
    }

    const ModelConfig& cfg = model.config();
    std::vector<Tensor> params = model.parameters();
    Adam adam(params, {.lr = cfg.learning_rate});
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);

    TrainCurves curves;
    const bool has_valid = !valid_set.empty();
    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<Tensor> best_params;
    std::vector<BatchNormState> best_bn;
    int since_best = 0;

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t epoch_hits = 0;

        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            adam.zero_grad();
            for (std::size_t i = start; i < end; ++i) {
                const std::size_t g = order[i];
                Tape tape;
                Tensor logits = model.forward(tape, *train_set[g], /*train=*/true, &rng);
                Tensor loss = tape.softmax_cross_entropy(tape.reshape(logits, {model.class_count()}),
                                                         train_labels[g]);
                const double lv = loss.value();
                if (!std::isfinite(lv)) {
                    throw TrainingError("loss diverged at epoch " + std::to_string(epoch) +
                                        ", graph " + std::to_string(g) + " (loss = " +
                                        std::to_string(lv) + ")");
                }
                epoch_loss += lv;
                const auto& v = logits.values();
                if (static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin()) ==
                    train_labels[g]) {
                    ++epoch_hits;
                }
                tape.backward(loss, 1.0 / static_cast<double>(end - start));
            }
            adam.step();
        }

        curves.train.push_back({epoch_loss / static_cast<double>(order.size()),
                                static_cast<double>(epoch_hits) / static_cast<double>(order.size())});
        curves.epochs_run = epoch + 1;

        double monitored;
        if (has_valid) {
            const EvalResult ev = evaluate(model, valid_set, valid_labels);
            curves.valid.push_back({ev.loss, ev.accuracy});
            monitored = ev.loss;
        } else {
            monitored = curves.train.back().loss;
        }

        if (cfg.patience > 0) {
            if (monitored < best_loss - 1e-12) {
                best_loss = monitored;
                curves.best_epoch = epoch;
                best_params = snapshot(params);
                best_bn = model.bn_states();
                since_best = 0;
            } else if (++since_best >= cfg.patience) {
                break;
            }
        }
    }

    if (cfg.patience > 0 && !best_params.empty()) {
        restore(params, best_params);
        model.bn_states() = best_bn;
    }
    if (curves.best_epoch < 0) curves.best_epoch = curves.epochs_run - 1;
    return curves;
}

namespace {

std::string format_metric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

struct FoldResult {
    double accuracy = 0.0;
    std::string csv_rows;
    std::optional<std::string> warning;
    Model model;
};

FoldResult run_fold(const ModelConfig& cfg, const std::vector<GraphFeatures>& feats,
                    const Dataset& data, const std::vector<int>& fold_of, int fold) {
    std::vector<const GraphFeatures*> train_set, valid_set, test_set;
    std::vector<int> train_y, valid_y, test_y;

    // stratified carve-out of ~10% of the training portion for early stopping
    std::vector<std::size_t> train_idx;
    for (std::size_t i = 0; i < data.graphs.size(); ++i) {
        if (fold_of[i] == fold) {
            test_set.push_back(&feats[i]);
            test_y.push_back(data.class_labels[i]);
        } else {
            train_idx.push_back(i);
        }
    }
    std::mt19937_64 carve_rng(cfg.seed * 0x100000001b3ull + static_cast<std::uint64_t>(fold));
    std::shuffle(train_idx.begin(), train_idx.end(), carve_rng);
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i : train_idx) by_class[data.class_labels[i]].push_back(i);
    std::set<std::size_t> valid_ids;
    for (auto& [cls, ids] : by_class) {
        if (ids.size() >= 10) {
            const std::size_t take = ids.size() / 10;
            for (std::size_t j = 0; j < take; ++j) valid_ids.insert(ids[j]);
        }
    }
    for (std::size_t i : train_idx) {
        if (valid_ids.count(i)) {
            valid_set.push_back(&feats[i]);
            valid_y.push_back(data.class_labels[i]);
        } else {
            train_set.push_back(&feats[i]);
            train_y.push_back(data.class_labels[i]);
        }
    }

    FoldResult r;
    {
        std::set<int> test_classes(test_y.begin(), test_y.end());
        if (static_cast<int>(test_classes.size()) < data.class_count()) {
            r.warning = "fold " + std::to_string(fold) + ": test split is missing " +
                        std::to_string(data.class_count() - test_classes.size()) + " class(es)";
        }
    }

    ModelConfig fold_cfg = cfg;
    fold_cfg.seed = cfg.seed + static_cast<std::uint64_t>(fold) * 7919u;
    Model model = Model::build(fold_cfg, data.class_count(), fold_cfg.seed);
    TrainCurves curves = train_model(model, train_set, train_y, valid_set, valid_y);

    std::ostringstream csv;
    for (int e = 0; e < curves.epochs_run; ++e) {
        csv << fold << "," << e << ",train," << format_metric(curves.train[e].loss) << ","
            << format_metric(curves.train[e].accuracy) << "\n";
        if (!curves.valid.empty()) {
            csv << fold << "," << e << ",valid," << format_metric(curves.valid[e].loss) << ","
                << format_metric(curves.valid[e].accuracy) << "\n";
        }
    }
    const EvalResult test = evaluate(model, test_set, test_y);
    csv << fold << "," << (curves.epochs_run - 1) << ",test," << format_metric(test.loss) << ","
        << format_metric(test.accuracy) << "\n";

    r.accuracy = test.accuracy;
    r.csv_rows = csv.str();
    r.model = std::move(model);
    return r;
}

}  // namespace

CVReport cross_validate(const ModelConfig& cfg_in, const Dataset& data, const CVOptions& opt) {
    data.validate();
    if (opt.folds < 2) throw ArgumentError("cross-validation needs at least 2 folds");
    if (data.graphs.size() < static_cast<std::size_t>(opt.folds)) {
        throw ArgumentError("dataset smaller than fold count");
    }
    if (data.class_count() < 2) throw ArgumentError("cross-validation needs at least 2 classes");

    const auto t0 = std::chrono::steady_clock::now();

    ModelConfig cfg = cfg_in;
    if (cfg.node_budget == 0) cfg.node_budget = resolve_node_budget(data);
    cfg.validate();

    // stratified fold assignment: per-class shuffle, then deal to folds with
    // a cursor that runs on across classes so small datasets still spread
    std::vector<int> fold_of(data.graphs.size(), 0);
    {
        std::mt19937_64 rng(cfg.seed);
        std::map<int, std::vector<std::size_t>> by_class;
        for (std::size_t i = 0; i < data.graphs.size(); ++i) {
            by_class[data.class_labels[i]].push_back(i);
        }
        std::size_t cursor = 0;
        for (auto& [cls, ids] : by_class) {
            std::shuffle(ids.begin(), ids.end(), rng);
            for (std::size_t i : ids) fold_of[i] = static_cast<int>(cursor++ % opt.folds);
        }
    }

    std::vector<GraphFeatures> feats;
    feats.reserve(data.graphs.size());
    for (const Graph& g : data.graphs) feats.push_back(GraphFeatures::compute(g, cfg));

    std::vector<FoldResult> results(opt.folds);
    std::vector<std::exception_ptr> errors(opt.folds);
    {
        int workers = opt.fold_threads > 0 ? opt.fold_threads
                                           : static_cast<int>(std::thread::hardware_concurrency());
        workers = std::max(1, std::min(workers, opt.folds));
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (int f = next.fetch_add(1); f < opt.folds; f = next.fetch_add(1)) {
                    try {
                        results[f] = run_fold(cfg, feats, data, fold_of, f);
                    } catch (...) {
                        errors[f] = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    CVReport report;
    report.effective_config = cfg;
    report.parameter_count = expected_parameter_count(cfg, data.class_count());

    std::ostringstream csv;
    csv << "fold,epoch,split,loss,accuracy\n";
    for (int f = 0; f < opt.folds; ++f) {
        report.fold_accuracies.push_back(results[f].accuracy);
        csv << results[f].csv_rows;
        if (results[f].warning) report.warnings.push_back(*results[f].warning);
    }

    double mean = 0.0;
    for (double a : report.fold_accuracies) mean += a;
    mean /= report.fold_accuracies.size();
    double var = 0.0;
    for (double a : report.fold_accuracies) var += (a - mean) * (a - mean);
    var = report.fold_accuracies.size() > 1 ? var / (report.fold_accuracies.size() - 1) : 0.0;
    report.mean_accuracy = mean;
    report.std_accuracy = std::sqrt(var);

    std::ostringstream summary;
    summary << "summary,folds=" << opt.folds << ",mean_accuracy=" << format_metric(mean)
            << ",std_accuracy=" << format_metric(report.std_accuracy)
            << ",params=" << report.parameter_count;
    report.summary_line = summary.str();
    csv << report.summary_line << "\n";
    report.metrics_csv = csv.str();

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (opt.out_dir) {
        std::filesystem::create_directories(*opt.out_dir);
        const auto csv_path = *opt.out_dir / "metrics.csv";
        const auto tmp = csv_path.string() + ".tmp";
        {
            std::ofstream out(tmp);
            if (!out) throw IoError("cannot write " + tmp);
            out << report.metrics_csv;
        }
        std::filesystem::rename(tmp, csv_path);
        for (int f = 0; f < opt.folds; ++f) {
            results[f].model.save(*opt.out_dir / ("fold_" + std::to_string(f) + ".model"));
        }
    }
    return report;
}

}  // namespace egograph
