#include "egograph/layers.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "egograph/errors.hpp"

namespace egograph {

namespace {

Tensor uniform_init(std::vector<int> shape, double bound, std::mt19937_64& rng) {
    Tensor t = Tensor::zeros(std::move(shape), /*requires_grad=*/true);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : t.values()) v = dist(rng);
    return t;
}

}  // namespace

Tensor apply_activation(Tape& tape, const Tensor& x, Activation act) {
    switch (act) {
        case Activation::relu: return tape.relu(x);
        case Activation::tanh: return tape.tanh(x);
    }
    throw ArgumentError("unknown activation");
}

PatchySanLayer PatchySanLayer::init(int k_base, int d, std::mt19937_64& rng) {
    if (k_base < 1 || d < 1) throw ArgumentError("patchy-san layer needs k_base, d >= 1");
    PatchySanLayer layer;
    layer.k_base = k_base;
    const double bound = std::sqrt(6.0 / (static_cast<double>(k_base) * k_base + d));
    layer.filters = uniform_init({d, k_base, k_base}, bound, rng);
    layer.bias = Tensor::zeros({d}, /*requires_grad=*/true);
    return layer;
}

EgoConvLayer EgoConvLayer::init(int k, int d_in, int d_out, std::mt19937_64& rng) {
    if (k < 1 || d_in < 1 || d_out < 1) throw ArgumentError("ego-conv layer needs k, d_in, d_out >= 1");
    EgoConvLayer layer;
    const double bound = std::sqrt(6.0 / (static_cast<double>(k + 1) * d_in + d_out));
    layer.filters = uniform_init({d_out, k + 1, d_in}, bound, rng);
    layer.bias = Tensor::zeros({d_out}, /*requires_grad=*/true);
    return layer;
}

EgoStack EgoStack::build(int layer_count, int k, int d_in, int d, bool tied, std::mt19937_64& rng) {
    if (layer_count < 1) throw ArgumentError("ego stack needs at least one layer");
    if (tied && d_in != d) {
        throw ConfigError("tied stack requires every layer to map D -> D, got input width " +
                          std::to_string(d_in) + " with D = " + std::to_string(d));
    }
    EgoStack stack;
    stack.tied = tied;
    if (tied) {
        EgoConvLayer shared = EgoConvLayer::init(k, d, d, rng);
        stack.layers.assign(layer_count, shared);  // same handles L times
    } else {
        stack.layers.push_back(EgoConvLayer::init(k, d_in, d, rng));
        for (int l = 1; l < layer_count; ++l) {
            stack.layers.push_back(EgoConvLayer::init(k, d, d, rng));
        }
    }
    return stack;
}

Tensor patchy_adjacency_stack(const Graph& g, const NeighborTable& table, int k_base) {
    if (table.k() < k_base) {
        throw ArgumentError("neighbor table K smaller than patchy-san K_base");
    }
    const NodeId n = g.node_count();
    Tensor stack = Tensor::zeros({n, k_base, k_base});
    auto& v = stack.values();
    for (NodeId i = 0; i < n; ++i) {
        double* a = v.data() + static_cast<std::size_t>(i) * k_base * k_base;
        for (int r = 0; r < k_base; ++r) {
            const NodeId nr = table.slot(i, r);
            if (nr == kPad) continue;
            for (int c = r + 1; c < k_base; ++c) {
                const NodeId nc = table.slot(i, c);
                if (nc == kPad) continue;
                if (g.has_edge(nr, nc)) {
                    const double w = g.weighted() ? g.edge_weight(nr, nc) : 1.0;
                    a[r * k_base + c] = w;
                    a[c * k_base + r] = w;
                }
            }
        }
    }
    return stack;
}

Tensor patchy_san_forward(Tape& tape, const Graph& g, const NeighborTable& table,
                          const PatchySanLayer& layer, Activation act) {
    Tensor stack = patchy_adjacency_stack(g, table, layer.k_base);
    Tensor z = tape.frobenius_batch(stack, layer.filters);
    return apply_activation(tape, tape.add_bias(z, layer.bias), act);
}

Tensor ego_conv_forward(Tape& tape, const Tensor& h_prev, const NeighborTable& table,
                        const EgoConvLayer& layer, Activation act) {
    if (h_prev.rank() != 2 || h_prev.dim(1) != layer.d_in()) {
        throw ArgumentError("ego_conv_forward: input width " +
                            std::to_string(h_prev.rank() == 2 ? h_prev.dim(1) : -1) +
                            " does not match layer D_in " + std::to_string(layer.d_in()));
    }
    Tensor stacked = tape.gather_stack(h_prev, table);
    Tensor z = tape.frobenius_batch(stacked, layer.filters);
    return apply_activation(tape, tape.add_bias(z, layer.bias), act);
}

std::vector<Tensor> stack_forward(Tape& tape, const Tensor& h0, const NeighborTable& table,
                                  const EgoStack& stack, const StackRuntime& rt) {
    if (stack.layers.empty()) throw ConfigError("empty ego stack");
    if (stack.tied && stack.layers.front().d_in() != stack.layers.front().d_out()) {
        throw ConfigError("tied stack with D_in != D_out");
    }
    const bool want_dropout = rt.train && rt.dropout_rate > 0.0;
    if (want_dropout && rt.rng == nullptr) {
        throw ArgumentError("stack_forward needs an rng for dropout while training");
    }
    if (rt.bn_states && rt.bn_states->size() != stack.layers.size() + 1) {
        throw ArgumentError("stack_forward: one batch-norm state per site expected");
    }

    const auto normalize = [&](Tape& t, const Tensor& x, std::size_t site) {
        BatchNormState* st = rt.bn_states ? &(*rt.bn_states)[site] : nullptr;
        const bool batch_stats = rt.train || st == nullptr || !st->initialized;
        return t.batch_norm(x, batch_stats, st, rt.train && rt.update_running && st != nullptr);
    };

    Tensor x = rt.batch_norm ? normalize(tape, h0, 0) : h0;
    std::vector<Tensor> outputs;
    outputs.reserve(stack.layers.size());
    for (std::size_t l = 0; l < stack.layers.size(); ++l) {
        const EgoConvLayer& layer = stack.layers[l];
        if (x.dim(1) != layer.d_in()) {
            throw ArgumentError("stack_forward: width " + std::to_string(x.dim(1)) +
                                " does not match layer D_in " + std::to_string(layer.d_in()));
        }
        Tensor in = want_dropout ? tape.dropout(x, rt.dropout_rate, true, *rt.rng) : x;
        Tensor z = tape.frobenius_batch(tape.gather_stack(in, table), layer.filters);
        if (rt.batch_norm) z = normalize(tape, z, l + 1);
        x = apply_activation(tape, tape.add_bias(z, layer.bias), rt.activation);
        outputs.push_back(x);
    }
    return outputs;
}

std::vector<NodeId> receptive_field(const NeighborTable& table, NodeId n, int l) {
    if (n < 0 || n >= table.node_count()) throw ArgumentError("receptive_field node out of range");
    if (l < 1) throw ArgumentError("receptive_field needs l >= 1");

    // frontier expansion over slot edges; equivalent to the recursive closure
    std::set<NodeId> field{n};
    std::set<NodeId> frontier{n};
    for (int depth = 0; depth < l; ++depth) {
        std::set<NodeId> next;
        for (NodeId m : frontier) {
            for (int s = 0; s < table.k(); ++s) {
                const NodeId nb = table.slot(m, s);
                if (nb == kPad) continue;
                if (field.insert(nb).second) next.insert(nb);
            }
        }
        if (next.empty()) break;
        frontier = std::move(next);
    }
    return {field.begin(), field.end()};
}

}  // namespace egograph
