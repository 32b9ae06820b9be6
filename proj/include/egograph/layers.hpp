#ifndef EGOGRAPH_LAYERS_HPP
#define EGOGRAPH_LAYERS_HPP

#include <random>
#include <vector>

#include "egograph/neighbor.hpp"
#include "egograph/tensor.hpp"

namespace egograph {

enum class Activation { relu, tanh };

Tensor apply_activation(Tape& tape, const Tensor& x, Activation act);

/// Base node-embedding layer: D filters scanned over each node's K_base x
/// K_base adjacency matrix among its selected neighbors.
struct PatchySanLayer {
    int k_base = 0;
    Tensor filters;  // [D, K_base, K_base]
    Tensor bias;     // [D]

    static PatchySanLayer init(int k_base, int d, std::mt19937_64& rng);
    int filter_count() const { return filters.dim(0); }
    std::size_t parameter_count() const { return filters.size() + bias.size(); }
};

/// One ego-convolution: D_out filters over the (K+1) x D_in stack of a node's
/// own row and its K selected neighbors' rows.
struct EgoConvLayer {
    Tensor filters;  // [D_out, K+1, D_in]
    Tensor bias;     // [D_out]

    static EgoConvLayer init(int k, int d_in, int d_out, std::mt19937_64& rng);
    int k() const { return filters.dim(1) - 1; }
    int d_in() const { return filters.dim(2); }
    int d_out() const { return filters.dim(0); }
    std::size_t parameter_count() const { return filters.size() + bias.size(); }
};

/// Stack of ego-convolutions sharing one neighbor table. When tied, every
/// entry holds the same parameter tensors, so gradient accumulation and
/// parameter counting fall out of handle identity.
struct EgoStack {
    std::vector<EgoConvLayer> layers;
    bool tied = false;

    static EgoStack build(int layer_count, int k, int d_in, int d, bool tied,
                          std::mt19937_64& rng);
    std::size_t layer_count() const { return layers.size(); }
};

/// Per-pass switches for stack_forward.
struct StackRuntime {
    bool train = false;
    double dropout_rate = 0.0;
    bool batch_norm = false;
    Activation activation = Activation::relu;
    std::mt19937_64* rng = nullptr;  // required when train && dropout_rate > 0
    /// One state per normalization site (input + each layer). Training uses
    /// batch statistics and, with update_running, folds them into the state;
    /// eval applies the frozen statistics. Without states (or before any
    /// update) both modes fall back to batch statistics.
    std::vector<BatchNormState>* bn_states = nullptr;
    bool update_running = false;
};

/// sigma(A^(n) (.) W^(d) + b_d) per node and filter; A^(n) is the adjacency
/// matrix among the node's first k_base selected neighbors, in slot order,
/// with zero rows/columns at pads.
Tensor patchy_san_forward(Tape& tape, const Graph& g, const NeighborTable& table,
                          const PatchySanLayer& layer, Activation act = Activation::relu);

/// Builds the constant stack of A^(n) matrices for a Patchy-San layer.
Tensor patchy_adjacency_stack(const Graph& g, const NeighborTable& table, int k_base);

/// sigma(E^(n) (.) W^(d) + b_d) with E^(n) = [h[n]; h[slot_1]; ...; h[slot_K]].
Tensor ego_conv_forward(Tape& tape, const Tensor& h_prev, const NeighborTable& table,
                        const EgoConvLayer& layer, Activation act = Activation::relu);

/// Sequential stack application. When batch_norm is on, the input and every
/// pre-activation are normalized over the node axis; dropout is applied to
/// each layer's input while training. Returns every layer's output H^(1..L).
std::vector<Tensor> stack_forward(Tape& tape, const Tensor& h0, const NeighborTable& table,
                                  const EgoStack& stack, const StackRuntime& rt);

/// Nodes a depth-l neuron centered at n can depend on:
/// R(n,1) = {n} u slots(n);  R(n,l) = {n} u union over m in slots(n) of R(m,l-1).
std::vector<NodeId> receptive_field(const NeighborTable& table, NodeId n, int l);

}  // namespace egograph

#endif
