#ifndef EGOGRAPH_MODEL_HPP
#define EGOGRAPH_MODEL_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "egograph/config.hpp"
#include "egograph/graph.hpp"
#include "egograph/layers.hpp"
#include "egograph/neighbor.hpp"
#include "egograph/wl.hpp"

namespace egograph {

/// Frozen per-graph structure: neighbor table, initial embedding, global
/// node ranking. Computed once and shared read-only by every epoch, fold
/// and thread that touches the graph.
struct GraphFeatures {
    const Graph* graph = nullptr;
    WLColoring coloring;
    NeighborTable table;        // K = cfg.k_neighbors slots per node
    Tensor h0;                  // adjacency vectors [N, K]
    Tensor patchy_stack;        // [N, K_base, K_base], patchy_san front end only
    std::vector<NodeId> ranking;

    static GraphFeatures compute(const Graph& g, const ModelConfig& cfg);
};

/// Full classifier: optional Patchy-San node-embedding layer, ego stack,
/// dense task head over the node_budget top-ranked node embeddings.
class Model {
public:
    Model() = default;

    /// node_budget must be resolved (> 0) before building.
    static Model build(const ModelConfig& cfg, int class_count, std::uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    int class_count() const { return class_count_; }

    /// Unique trainable tensors in a fixed order (tied layers appear once).
    std::vector<Tensor> parameters() const;
    std::size_t parameter_count() const;

    /// Logits [1, C]. With layer_outputs non-null, every ego layer's H^(l)
    /// is appended for visualization. `rng` is only needed while training
    /// with dropout.
    Tensor forward(Tape& tape, const GraphFeatures& f, bool train, std::mt19937_64* rng = nullptr,
                   std::vector<Tensor>* layer_outputs = nullptr) const;

    int predict(const GraphFeatures& f) const;

    const EgoStack& stack() const { return stack_; }
    const std::optional<PatchySanLayer>& patchy() const { return patchy_; }

    /// Running normalization statistics (input site + one per layer);
    /// buffers, not trainable parameters. Shared like tensor storage.
    std::vector<BatchNormState>& bn_states() const { return *bn_states_; }

    void save(const std::filesystem::path& path) const;
    static Model load(const std::filesystem::path& path);

private:
    ModelConfig cfg_;
    int class_count_ = 0;
    std::optional<PatchySanLayer> patchy_;
    EgoStack stack_;
    std::shared_ptr<std::vector<BatchNormState>> bn_states_;
    std::vector<Tensor> dense_weights_;  // hidden layers then output layer
    std::vector<Tensor> dense_biases_;

    friend std::size_t expected_parameter_count(const ModelConfig&, int);
    friend class ModelCodec;
};

/// Closed-form trainable-parameter count for a resolved config.
std::size_t expected_parameter_count(const ModelConfig& cfg, int class_count);

/// 90th-percentile node count, the auto value for cfg.node_budget.
int resolve_node_budget(const Dataset& data);

struct EpochPoint {
    double loss = 0.0;
    double accuracy = 0.0;
};

struct TrainCurves {
    std::vector<EpochPoint> train;
    std::vector<EpochPoint> valid;  // empty when no validation split
    int best_epoch = -1;
    int epochs_run = 0;
};

/// Minibatch Adam training with optional early stopping on validation loss.
/// Deterministic for a fixed config seed. Throws TrainingError when the
/// loss stops being finite.
TrainCurves train_model(Model& model, const std::vector<const GraphFeatures*>& train_set,
                        const std::vector<int>& train_labels,
                        const std::vector<const GraphFeatures*>& valid_set,
                        const std::vector<int>& valid_labels);

double evaluate_accuracy(const Model& model, const std::vector<const GraphFeatures*>& set,
                         const std::vector<int>& labels);

struct CVReport {
    std::vector<double> fold_accuracies;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;  // sample standard deviation
    double wall_seconds = 0.0;
    std::size_t parameter_count = 0;
    ModelConfig effective_config;  // node_budget resolved
    std::vector<std::string> warnings;
    std::string metrics_csv;    // "fold,epoch,split,loss,accuracy" rows + summary line
    std::string summary_line;
};

struct CVOptions {
    int folds = 10;
    /// Worker threads for fold-level parallelism; 0 = hardware concurrency.
    int fold_threads = 0;
    /// When set, fold models and metrics.csv are written here.
    std::optional<std::filesystem::path> out_dir;
};

/// Stratified k-fold cross-validation: train on k-1 folds (with a carved
/// validation split for early stopping), test on the held-out fold.
CVReport cross_validate(const ModelConfig& cfg, const Dataset& data, const CVOptions& opt = {});

}  // namespace egograph

#endif
