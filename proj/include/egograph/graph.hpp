#ifndef EGOGRAPH_GRAPH_HPP
#define EGOGRAPH_GRAPH_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace egograph {

using NodeId = std::int32_t;

/// Immutable labeled undirected graph with optional positive edge weights.
/// Node ids are 0..node_count-1; adjacency lists are sorted so every
/// iteration order downstream is deterministic.
class Graph {
public:
    Graph() = default;
    Graph(NodeId node_count,
          const std::vector<std::pair<NodeId, NodeId>>& edges,
          std::optional<std::vector<int>> node_labels = std::nullopt,
          std::optional<std::vector<double>> edge_weights = std::nullopt);

    NodeId node_count() const { return node_count_; }
    std::size_t edge_count() const { return edges_.size(); }

    /// Sorted adjacent node ids.
    const std::vector<NodeId>& neighbors(NodeId n) const;
    int degree(NodeId n) const;
    int max_degree() const;

    bool has_edge(NodeId u, NodeId v) const;
    /// 1.0 when the graph is unweighted; throws ArgumentError if (u,v) is not an edge.
    double edge_weight(NodeId u, NodeId v) const;
    /// Weight of neighbors(n)[i], aligned with the adjacency list.
    double neighbor_weight(NodeId n, std::size_t i) const;

    bool weighted() const { return weighted_; }
    bool labeled() const { return !node_labels_.empty(); }
    int node_label(NodeId n) const;
    const std::vector<int>& node_labels() const { return node_labels_; }

    /// Canonical edge list: pairs with u < v, sorted lexicographically.
    const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }

private:
    void check_node(NodeId n) const;

    NodeId node_count_ = 0;
    std::vector<std::pair<NodeId, NodeId>> edges_;
    std::vector<double> edge_weights_;  // aligned with edges_, empty if unweighted
    std::vector<std::vector<NodeId>> adjacency_;
    std::vector<std::vector<double>> adjacency_weights_;
    std::vector<int> node_labels_;
    bool weighted_ = false;
};

/// A set of graphs with one class label each; the unit the classifier trains on.
struct Dataset {
    std::vector<Graph> graphs;
    std::vector<int> class_labels;  // 0..C-1
    std::string name;

    int class_count() const;
    void validate() const;  // throws ConsistencyError on length mismatch / bad labels
};

/// l-hop ball around a center node together with all induced edges.
struct EgoNetwork {
    NodeId center = 0;
    int radius = 0;
    std::vector<NodeId> member_nodes;                     // sorted
    std::vector<std::pair<NodeId, NodeId>> induced_edges; // u < v, sorted
};

EgoNetwork ego_network(const Graph& g, NodeId n, int radius);

std::map<int, std::int64_t> degree_histogram(const Graph& g);
std::map<int, std::int64_t> degree_histogram(const Dataset& d);

struct PowerLawFit {
    double exponent;   // negated slope of the log-log fit
    double r_squared;  // in [0, 1]
};

/// Least-squares line through (log k, log count) over bins with k >= 1 and
/// count > 0. Requires at least 3 such bins.
PowerLawFit power_law_fit(const std::map<int, double>& histogram);
PowerLawFit power_law_fit(const std::map<int, std::int64_t>& histogram);

}  // namespace egograph

#endif
