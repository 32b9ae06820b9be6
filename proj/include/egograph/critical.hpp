#ifndef EGOGRAPH_CRITICAL_HPP
#define EGOGRAPH_CRITICAL_HPP

#include <map>
#include <span>
#include <vector>

#include "egograph/model.hpp"

namespace egograph {

/// Post-hoc probe: softmax attention over last-layer node embeddings plus a
/// linear head, trained on the task loss with the ego stack frozen.
struct AttentionProbe {
    Tensor score_weight;  // [D, 1]
    Tensor score_bias;    // [1]
    Tensor head_weight;   // [D, C]
    Tensor head_bias;     // [C]

    std::vector<Tensor> parameters() const;
    /// gamma over the graph's nodes; non-negative, sums to 1.
    std::vector<double> attention(const Tensor& h_last) const;
    int predict(const Tensor& h_last) const;
};

struct ProbeFitOptions {
    double learning_rate = 1e-2;
    int epochs = 200;
    std::uint64_t seed = 1;
};

/// Eval-mode ego-stack outputs H^(1..L) for one graph.
struct ActivationCache {
    std::vector<Tensor> layer_outputs;
};

ActivationCache compute_activations(const Model& model, const GraphFeatures& f);

/// Trains only the probe weights; the model is read, never written.
AttentionProbe fit_attention_probe(const Model& model,
                                   const std::vector<const GraphFeatures*>& set,
                                   const std::vector<int>& labels,
                                   const ProbeFitOptions& opt = {});

double default_importance_threshold(std::size_t node_count);  // 1 / (2N)

/// Nodes whose attention score exceeds the threshold.
std::vector<NodeId> select_important(std::span<const double> gamma, double threshold);

/// Signed slot-space reconstruction: transposed deconvolution from
/// gamma-scaled last-layer embeddings down through every ego layer (and
/// through the Patchy-San filters at slot granularity when that front end
/// is active). Returns an N x K matrix aligned with the neighbor table;
/// entry (n, k) is the signed mass assigned to the edge (n, slot_k(n)).
/// Linear in gamma.
std::vector<double> backtrack_signed(const Model& model, const GraphFeatures& f,
                                     const ActivationCache& cache, std::span<const double> gamma);

/// Graph overlaid with non-negative node and edge importances.
struct CriticalStructure {
    const Graph* base = nullptr;
    std::vector<double> node_importance;
    std::map<std::pair<NodeId, NodeId>, double> edge_importance;  // keys u < v
    double threshold = 0.0;
};

/// Thresholds gamma, backtracks the surviving attention mass, and converts
/// the signed reconstruction to magnitudes: an edge collects |entry| from
/// every slot that references it, a node collects its own row plus all of
/// its appearances in other rows.
CriticalStructure backtrack(const Model& model, const GraphFeatures& f,
                            const ActivationCache& cache, std::span<const double> gamma,
                            double threshold);

// probe sidecar cache, keyed by a hash of the owning model file
std::uint64_t fnv1a_file_hash(const std::filesystem::path& path);
void save_probe(const AttentionProbe& probe, const std::filesystem::path& path,
                std::uint64_t model_hash);
/// Empty result when the file is missing or was fitted for another model.
std::optional<AttentionProbe> load_probe(const std::filesystem::path& path,
                                         std::uint64_t model_hash);

}  // namespace egograph

#endif
