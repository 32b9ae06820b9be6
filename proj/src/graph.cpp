#include "egograph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>

#include "egograph/errors.hpp"

namespace egograph {

Graph::Graph(NodeId node_count,
             const std::vector<std::pair<NodeId, NodeId>>& edges,
             std::optional<std::vector<int>> node_labels,
             std::optional<std::vector<double>> edge_weights)
    : node_count_(node_count) {
    if (node_count < 0) {
        throw ArgumentError("graph node count must be non-negative");
    }
    if (node_labels && static_cast<NodeId>(node_labels->size()) != node_count) {
        throw ArgumentError("node label count does not match node count");
    }
    if (edge_weights && edge_weights->size() != edges.size()) {
        throw ArgumentError("edge weight count does not match edge count");
    }

    weighted_ = edge_weights.has_value();

    // Normalize to u < v, dropping duplicates; the first occurrence wins
    // for the weight of a repeated edge.
    std::map<std::pair<NodeId, NodeId>, double> canonical;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto [u, v] = edges[i];
        if (u < 0 || u >= node_count || v < 0 || v >= node_count) {
            throw ArgumentError("edge endpoint out of range: (" + std::to_string(u) + ", " +
                                std::to_string(v) + ")");
        }
        if (u == v) {
            throw ArgumentError("self-loop at node " + std::to_string(u));
        }
        if (u > v) std::swap(u, v);
        double w = weighted_ ? (*edge_weights)[i] : 1.0;
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw ArgumentError("edge weight must be finite and positive");
        }
        canonical.emplace(std::pair{u, v}, w);
    }

    edges_.reserve(canonical.size());
    if (weighted_) edge_weights_.reserve(canonical.size());
    adjacency_.resize(node_count);
    adjacency_weights_.resize(node_count);
    for (const auto& [e, w] : canonical) {
        edges_.push_back(e);
        if (weighted_) edge_weights_.push_back(w);
        adjacency_[e.first].push_back(e.second);
        adjacency_[e.second].push_back(e.first);
        adjacency_weights_[e.first].push_back(w);
        adjacency_weights_[e.second].push_back(w);
    }
    for (NodeId n = 0; n < node_count; ++n) {
        // map iteration emits sorted pairs, so each list is sorted in the
        // first endpoint but appended out of order in the second; fix up.
        std::vector<std::size_t> order(adjacency_[n].size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return adjacency_[n][a] < adjacency_[n][b];
        });
        std::vector<NodeId> nbrs(order.size());
        std::vector<double> ws(order.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            nbrs[i] = adjacency_[n][order[i]];
            ws[i] = adjacency_weights_[n][order[i]];
        }
        adjacency_[n] = std::move(nbrs);
        adjacency_weights_[n] = std::move(ws);
    }

    if (node_labels) node_labels_ = std::move(*node_labels);
}

void Graph::check_node(NodeId n) const {
    if (n < 0 || n >= node_count_) {
        throw ArgumentError("node id " + std::to_string(n) + " out of range [0, " +
                            std::to_string(node_count_) + ")");
    }
}

const std::vector<NodeId>& Graph::neighbors(NodeId n) const {
    check_node(n);
    return adjacency_[n];
}

int Graph::degree(NodeId n) const {
    check_node(n);
    return static_cast<int>(adjacency_[n].size());
}

int Graph::max_degree() const {
    int m = 0;
    for (const auto& a : adjacency_) m = std::max(m, static_cast<int>(a.size()));
    return m;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
    check_node(u);
    check_node(v);
    const auto& a = adjacency_[u];
    return std::binary_search(a.begin(), a.end(), v);
}

double Graph::edge_weight(NodeId u, NodeId v) const {
    check_node(u);
    check_node(v);
    const auto& a = adjacency_[u];
    auto it = std::lower_bound(a.begin(), a.end(), v);
    if (it == a.end() || *it != v) {
        throw ArgumentError("(" + std::to_string(u) + ", " + std::to_string(v) +
                            ") is not an edge");
    }
    return adjacency_weights_[u][static_cast<std::size_t>(it - a.begin())];
}

double Graph::neighbor_weight(NodeId n, std::size_t i) const {
    check_node(n);
    if (i >= adjacency_weights_[n].size()) {
        throw ArgumentError("neighbor index out of range");
    }
    return adjacency_weights_[n][i];
}

int Graph::node_label(NodeId n) const {
    check_node(n);
    if (node_labels_.empty()) {
        throw StateError("graph has no node labels");
    }
    return node_labels_[n];
}

int Dataset::class_count() const {
    int c = 0;
    for (int y : class_labels) c = std::max(c, y + 1);
    return c;
}

void Dataset::validate() const {
    if (graphs.size() != class_labels.size()) {
        throw ConsistencyError("dataset has " + std::to_string(graphs.size()) + " graphs but " +
                               std::to_string(class_labels.size()) + " class labels");
    }
    for (int y : class_labels) {
        if (y < 0) throw ConsistencyError("negative class label");
    }
}

EgoNetwork ego_network(const Graph& g, NodeId n, int radius) {
    if (n < 0 || n >= g.node_count()) {
        throw ArgumentError("ego center " + std::to_string(n) + " out of range");
    }
    if (radius < 0) {
        throw ArgumentError("ego radius must be non-negative");
    }

    std::vector<int> dist(g.node_count(), -1);
    std::queue<NodeId> frontier;
    dist[n] = 0;
    frontier.push(n);
    while (!frontier.empty()) {
        NodeId u = frontier.front();
        frontier.pop();
        if (dist[u] == radius) continue;
        for (NodeId v : g.neighbors(u)) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                frontier.push(v);
            }
        }
    }

    EgoNetwork ego;
    ego.center = n;
    ego.radius = radius;
    for (NodeId v = 0; v < g.node_count(); ++v) {
        if (dist[v] >= 0) ego.member_nodes.push_back(v);
    }
    for (const auto& [u, v] : g.edges()) {
        if (dist[u] >= 0 && dist[v] >= 0) ego.induced_edges.emplace_back(u, v);
    }
    return ego;
}

std::map<int, std::int64_t> degree_histogram(const Graph& g) {
    std::map<int, std::int64_t> hist;
    for (NodeId n = 0; n < g.node_count(); ++n) {
        ++hist[g.degree(n)];
    }
    return hist;
}

std::map<int, std::int64_t> degree_histogram(const Dataset& d) {
    std::map<int, std::int64_t> hist;
    for (const auto& g : d.graphs) {
        for (NodeId n = 0; n < g.node_count(); ++n) {
            ++hist[g.degree(n)];
        }
    }
    return hist;
}

PowerLawFit power_law_fit(const std::map<int, double>& histogram) {
    std::vector<double> xs, ys;
    for (const auto& [degree, count] : histogram) {
        if (degree >= 1 && count > 0.0) {
            xs.push_back(std::log(static_cast<double>(degree)));
            ys.push_back(std::log(count));
        }
    }
    if (xs.size() < 3) {
        throw InsufficientDataError("power-law fit needs at least 3 distinct nonzero degrees, got " +
                                    std::to_string(xs.size()));
    }

    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) {
        throw InsufficientDataError("power-law fit is degenerate: all degrees equal");
    }
    const double slope = sxy / sxx;
    double ss_res = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double pred = my + slope * (xs[i] - mx);
        ss_res += (ys[i] - pred) * (ys[i] - pred);
    }
    PowerLawFit fit;
    fit.exponent = -slope;
    fit.r_squared = (syy == 0.0) ? 1.0 : std::max(0.0, std::min(1.0, 1.0 - ss_res / syy));
    return fit;
}

PowerLawFit power_law_fit(const std::map<int, std::int64_t>& histogram) {
    std::map<int, double> h;
    for (const auto& [k, c] : histogram) h[k] = static_cast<double>(c);
    return power_law_fit(h);
}

}  // namespace egograph
