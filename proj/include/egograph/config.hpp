#ifndef EGOGRAPH_CONFIG_HPP
#define EGOGRAPH_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "egograph/layers.hpp"

namespace egograph {

enum class FrontEnd { adjacency, patchy_san };

/// Everything a training run needs, with desk-scale defaults. The config
/// file format is sectioned key = value text; see parse_model_config.
struct ModelConfig {
    // [model]
    int k_neighbors = 4;        // K: slots per node
    int layers = 3;             // L: ego-convolution layers
    int filters = 32;           // D: filters per layer
    FrontEnd front_end = FrontEnd::adjacency;
    int patchy_k = 10;          // K_base, patchy_san front end only
    int patchy_filters = 128;   // D_base, patchy_san front end only
    bool tied = false;
    int node_budget = 0;        // readout rows; 0 = 90th percentile of training set
    std::vector<int> dense_sizes = {128};
    Activation activation = Activation::relu;
    int wl_iterations = 2;
    bool batch_norm = true;

    // [train]
    double dropout_rate = 0.5;
    double learning_rate = 1e-4;
    int epochs = 300;
    int batch_size = 32;
    int patience = 30;          // early-stopping patience, 0 disables
    std::uint64_t seed = 1;

    void validate() const;  // throws ConfigError
    /// Input width of the first ego layer under this front end.
    int stack_input_width() const;
};

/// Parses the sectioned key = value format:
///
///   # comment
///   [model]
///   k_neighbors = 4
///   dense_sizes = 128, 64
///   [train]
///   learning_rate = 0.001
///
/// Unknown keys are an error. Missing keys keep their defaults.
ModelConfig parse_model_config(const std::string& text);
ModelConfig load_model_config(const std::string& path);

/// Round-trippable echo of a config (parse_model_config(config_to_text(c))
/// reproduces c).
std::string config_to_text(const ModelConfig& cfg);

}  // namespace egograph

#endif
