#include "egograph/neighbor.hpp"

#include <algorithm>
#include <numeric>

#include "egograph/errors.hpp"

namespace egograph {

NeighborTable::NeighborTable(NodeId node_count, int k) : node_count_(node_count), k_(k) {
    if (k < 1) throw ArgumentError("neighbor table needs K >= 1");
    slots_.assign(static_cast<std::size_t>(node_count) * k, kPad);
}

int NeighborTable::filled(NodeId n) const {
    int c = 0;
    while (c < k_ && !is_pad(n, c)) ++c;
    return c;
}

NeighborTable select_neighbors(const Graph& g, int k, const WLColoring& coloring) {
    if (k < 1) throw ArgumentError("select_neighbors needs K >= 1");
    if (static_cast<NodeId>(coloring.final_colors().size()) != g.node_count()) {
        throw ArgumentError("coloring does not match graph");
    }
    const std::vector<int>& colors = coloring.final_colors();

    NeighborTable table(g.node_count(), k);
    std::vector<std::size_t> order;
    for (NodeId n = 0; n < g.node_count(); ++n) {
        const auto& nbrs = g.neighbors(n);
        order.resize(nbrs.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const NodeId ma = nbrs[a], mb = nbrs[b];
            const int fa = coloring.frequency(colors[ma]);
            const int fb = coloring.frequency(colors[mb]);
            if (fa != fb) return fa < fb;
            const double wa = g.neighbor_weight(n, a);
            const double wb = g.neighbor_weight(n, b);
            if (wa != wb) return wa > wb;
            if (colors[ma] != colors[mb]) return colors[ma] < colors[mb];
            return ma < mb;
        });
        const int take = std::min<int>(k, static_cast<int>(nbrs.size()));
        for (int i = 0; i < take; ++i) {
            table.set_slot(n, i, nbrs[order[i]]);
        }
    }
    return table;
}

Tensor initial_embedding(const Graph& g, const NeighborTable& table) {
    if (table.node_count() != g.node_count()) {
        throw ArgumentError("neighbor table does not match graph");
    }
    const int k = table.k();
    Tensor h0 = Tensor::zeros({g.node_count(), k});
    auto& v = h0.values();
    for (NodeId n = 0; n < g.node_count(); ++n) {
        for (int i = 0; i < k; ++i) {
            const NodeId m = table.slot(n, i);
            if (m == kPad) break;
            v[static_cast<std::size_t>(n) * k + i] = g.weighted() ? g.edge_weight(n, m) : 1.0;
        }
    }
    return h0;
}

std::vector<NodeId> global_node_ranking(const Graph& g, const WLColoring& coloring) {
    if (static_cast<NodeId>(coloring.final_colors().size()) != g.node_count()) {
        throw ArgumentError("coloring does not match graph");
    }
    const std::vector<int>& colors = coloring.final_colors();
    std::vector<NodeId> ranking(g.node_count());
    std::iota(ranking.begin(), ranking.end(), 0);
    std::sort(ranking.begin(), ranking.end(), [&](NodeId a, NodeId b) {
        const int fa = coloring.frequency(colors[a]);
        const int fb = coloring.frequency(colors[b]);
        if (fa != fb) return fa < fb;
        if (colors[a] != colors[b]) return colors[a] < colors[b];
        return a < b;
    });
    return ranking;
}

}  // namespace egograph
