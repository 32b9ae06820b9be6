#ifndef EGOGRAPH_NEIGHBOR_HPP
#define EGOGRAPH_NEIGHBOR_HPP

#include <vector>

#include "egograph/graph.hpp"
#include "egograph/tensor.hpp"
#include "egograph/wl.hpp"

namespace egograph {

inline constexpr NodeId kPad = -1;

/// Per-node ordered list of the K selected adjacent neighbors, padded with
/// kPad. Built once per graph and shared by every layer; a pure function of
/// (graph, K, coloring), so recomputing always reproduces it bit for bit.
class NeighborTable {
public:
    NeighborTable() = default;
    NeighborTable(NodeId node_count, int k);

    int k() const { return k_; }
    NodeId node_count() const { return node_count_; }

    NodeId slot(NodeId n, int kth) const { return slots_[static_cast<std::size_t>(n) * k_ + kth]; }
    bool is_pad(NodeId n, int kth) const { return slot(n, kth) == kPad; }
    /// Number of leading non-pad slots of node n.
    int filled(NodeId n) const;

    void set_slot(NodeId n, int kth, NodeId value) {
        slots_[static_cast<std::size_t>(n) * k_ + kth] = value;
    }

    const std::vector<NodeId>& raw_slots() const { return slots_; }

private:
    NodeId node_count_ = 0;
    int k_ = 0;
    std::vector<NodeId> slots_;  // node-major, kPad where empty
};

/// Ranks each node's adjacent neighbors by (ascending final-iteration color
/// frequency, descending edge weight, ascending color id, ascending node id)
/// and keeps the top K. The color-id step only matters when two neighbors
/// tie on frequency and weight while holding different colors; it keeps the
/// table equivariant under vertex relabeling whenever the final coloring is
/// discrete.
NeighborTable select_neighbors(const Graph& g, int k, const WLColoring& coloring);

/// H0[n,k] = weight of the edge to slot k's neighbor (1 when unweighted),
/// 0 at pad slots.
Tensor initial_embedding(const Graph& g, const NeighborTable& table);

/// All nodes ordered by (ascending final color frequency, ascending color
/// id, ascending node id): rarest structural roles first. Used as the
/// deterministic global node ranking for fixed-size readout.
std::vector<NodeId> global_node_ranking(const Graph& g, const WLColoring& coloring);

}  // namespace egograph

#endif
