// Brute-force reference implementations used only by tests. Each oracle is
// written from the definition, independent of the library code paths it
// checks.
#ifndef EGOGRAPH_TESTS_ORACLES_HPP
#define EGOGRAPH_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "egograph/graph.hpp"
#include "egograph/layers.hpp"
#include "egograph/neighbor.hpp"

namespace oracles {

using egograph::Graph;
using egograph::NodeId;

// plain BFS ball + induced edges, sets all the way
struct EgoBall {
    std::set<NodeId> nodes;
    std::set<std::pair<NodeId, NodeId>> edges;
};

inline EgoBall ego_ball(const Graph& g, NodeId center, int radius) {
    std::map<NodeId, int> dist;
    dist[center] = 0;
    std::vector<NodeId> frontier{center};
    for (int d = 0; d < radius; ++d) {
        std::vector<NodeId> next;
        for (NodeId u : frontier) {
            for (NodeId v : g.neighbors(u)) {
                if (!dist.count(v)) {
                    dist[v] = d + 1;
                    next.push_back(v);
                }
            }
        }
        frontier = std::move(next);
    }
    EgoBall ball;
    for (const auto& [n, d] : dist) ball.nodes.insert(n);
    for (NodeId u : ball.nodes) {
        for (NodeId v : g.neighbors(u)) {
            if (u < v && ball.nodes.count(v)) ball.edges.insert({u, v});
        }
    }
    return ball;
}

// 1-WL refinement with string signatures; returns the partition per round
inline std::vector<std::vector<std::string>> wl_signatures(const Graph& g, int rounds) {
    const NodeId n = g.node_count();
    std::vector<std::string> sig(n);
    for (NodeId i = 0; i < n; ++i) {
        sig[i] = g.labeled() ? "L" + std::to_string(g.node_label(i)) : "L0";
    }
    std::vector<std::vector<std::string>> out{sig};
    for (int t = 0; t < rounds; ++t) {
        std::vector<std::string> next(n);
        for (NodeId i = 0; i < n; ++i) {
            std::vector<std::string> nbr;
            for (NodeId m : g.neighbors(i)) nbr.push_back(sig[m]);
            std::sort(nbr.begin(), nbr.end());
            std::string s = "(" + sig[i] + "|";
            for (const auto& x : nbr) s += x + ",";
            s += ")";
            next[i] = s;
        }
        sig = std::move(next);
        out.push_back(sig);
    }
    return out;
}

inline int distinct_count(const std::vector<std::string>& sigs) {
    return static_cast<int>(std::set<std::string>(sigs.begin(), sigs.end()).size());
}

// explicit-E ego convolution: materializes every E^(n) and applies the
// Frobenius product filter by filter
inline std::vector<double> ego_conv_explicit(const std::vector<double>& h, int n, int d_in,
                                             const egograph::NeighborTable& table,
                                             const std::vector<double>& filters,
                                             const std::vector<double>& bias, int d_out,
                                             bool use_tanh) {
    const int k = table.k();
    std::vector<double> out(static_cast<std::size_t>(n) * d_out, 0.0);
    for (int i = 0; i < n; ++i) {
        std::vector<double> e(static_cast<std::size_t>(k + 1) * d_in, 0.0);
        for (int c = 0; c < d_in; ++c) e[c] = h[static_cast<std::size_t>(i) * d_in + c];
        for (int s = 0; s < k; ++s) {
            const NodeId m = table.slot(i, s);
            if (m == egograph::kPad) continue;
            for (int c = 0; c < d_in; ++c) {
                e[static_cast<std::size_t>(s + 1) * d_in + c] =
                    h[static_cast<std::size_t>(m) * d_in + c];
            }
        }
        for (int f = 0; f < d_out; ++f) {
            double acc = bias[f];
            for (std::size_t j = 0; j < e.size(); ++j) {
                acc += e[j] * filters[static_cast<std::size_t>(f) * e.size() + j];
            }
            out[static_cast<std::size_t>(i) * d_out + f] =
                use_tanh ? std::tanh(acc) : std::max(0.0, acc);
        }
    }
    return out;
}

// literal recursive closure R(n,l)
inline std::set<NodeId> receptive_closure(const egograph::NeighborTable& table, NodeId n, int l) {
    std::set<NodeId> r{n};
    if (l == 0) return r;
    for (int s = 0; s < table.k(); ++s) {
        const NodeId m = table.slot(n, s);
        if (m == egograph::kPad) continue;
        if (l == 1) {
            r.insert(m);
        } else {
            const auto sub = receptive_closure(table, m, l - 1);
            r.insert(sub.begin(), sub.end());
        }
    }
    return r;
}

// label- and adjacency-preserving bijection search by backtracking
inline bool extend_mapping(const Graph& a, const Graph& b, std::vector<NodeId>& map,
                           std::vector<bool>& used, NodeId next) {
    const NodeId n = a.node_count();
    if (next == n) return true;
    for (NodeId cand = 0; cand < n; ++cand) {
        if (used[cand]) continue;
        if (a.labeled() != b.labeled()) return false;
        if (a.labeled() && a.node_label(next) != b.node_label(cand)) continue;
        if (a.degree(next) != b.degree(cand)) continue;
        bool ok = true;
        for (NodeId prev = 0; prev < next && ok; ++prev) {
            if (a.has_edge(next, prev) != b.has_edge(cand, map[prev])) ok = false;
        }
        if (!ok) continue;
        map[next] = cand;
        used[cand] = true;
        if (extend_mapping(a, b, map, used, next + 1)) return true;
        used[cand] = false;
    }
    return false;
}

inline bool isomorphic(const Graph& a, const Graph& b) {
    if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
    std::vector<NodeId> map(a.node_count(), -1);
    std::vector<bool> used(a.node_count(), false);
    return extend_mapping(a, b, map, used, 0);
}

// does g admit an automorphism that swaps u and v?
inline bool has_swapping_automorphism(const Graph& g, NodeId u, NodeId v) {
    const NodeId n = g.node_count();
    std::vector<NodeId> map(n, -1);
    std::vector<bool> used(n, false);
    // pin the swap, then extend
    struct Pinned {
        const Graph& g;
        std::vector<NodeId>& map;
        std::vector<bool>& used;
        bool extend(NodeId next) {
            if (next == g.node_count()) return true;
            if (map[next] >= 0) {
                return check(next) && extend(next + 1);
            }
            for (NodeId cand = 0; cand < g.node_count(); ++cand) {
                if (used[cand]) continue;
                if (g.labeled() && g.node_label(next) != g.node_label(cand)) continue;
                if (g.degree(next) != g.degree(cand)) continue;
                map[next] = cand;
                used[cand] = true;
                if (check(next) && extend(next + 1)) return true;
                map[next] = -1;
                used[cand] = false;
            }
            return false;
        }
        bool check(NodeId next) {
            for (NodeId prev = 0; prev <= next; ++prev) {
                if (map[prev] < 0) continue;
                if (g.has_edge(next, prev) != g.has_edge(map[next], map[prev])) return false;
            }
            return true;
        }
    } search{g, map, used};
    map[u] = v;
    map[v] = u;
    used[u] = used[v] = true;
    if (g.labeled() && (g.node_label(u) != g.node_label(v) || g.degree(u) != g.degree(v))) {
        return false;
    }
    return search.extend(0);
}

// seeded Erdos-Renyi-ish random graph, always returned with sorted ids
inline Graph random_graph(int n, double p, std::mt19937_64& rng, bool labeled = false) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
            if (unit(rng) < p) edges.emplace_back(u, v);
        }
    }
    if (!labeled) return Graph(n, edges);
    std::uniform_int_distribution<int> lab(0, 2);
    std::vector<int> labels(n);
    for (auto& l : labels) l = lab(rng);
    return Graph(n, edges, labels);
}

inline egograph::Tensor random_tensor(std::vector<int> shape, std::mt19937_64& rng,
                                      double scale = 1.0, bool requires_grad = true) {
    auto t = egograph::Tensor::zeros(std::move(shape), requires_grad);
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (double& v : t.values()) v = dist(rng);
    return t;
}

}  // namespace oracles

#endif
