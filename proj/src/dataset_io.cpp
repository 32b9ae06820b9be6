#include "egograph/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "egograph/errors.hpp"

namespace egograph {

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw FormatError("missing benchmark file: " + file.string());
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        // trailing blank lines are common in shipped datasets
        bool blank = line.find_first_not_of(" \t") == std::string::npos;
        if (blank) continue;
        lines.push_back(line);
    }
    return lines;
}

long parse_long(const std::string& s, const std::filesystem::path& file, std::size_t lineno) {
    try {
        std::size_t pos = 0;
        long v = std::stol(s, &pos);
        if (s.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw FormatError(file.string() + ":" + std::to_string(lineno + 1) +
                          ": expected an integer, got \"" + s + "\"");
    }
}

double parse_double(const std::string& s, const std::filesystem::path& file, std::size_t lineno) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (s.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw FormatError(file.string() + ":" + std::to_string(lineno + 1) +
                          ": expected a number, got \"" + s + "\"");
    }
}

}  // namespace

Dataset parse_benchmark_dataset(const std::filesystem::path& directory, const std::string& name) {
    const auto adj_file = directory / (name + "_A.txt");
    const auto indicator_file = directory / (name + "_graph_indicator.txt");
    const auto graph_labels_file = directory / (name + "_graph_labels.txt");
    const auto node_labels_file = directory / (name + "_node_labels.txt");
    const auto edge_attr_file = directory / (name + "_edge_attributes.txt");

    const auto indicator_lines = read_lines(indicator_file);
    const std::size_t total_nodes = indicator_lines.size();

    // graph id per global node, 1-indexed and non-decreasing in the shipped data,
    // but only contiguity per graph is actually required here
    std::vector<long> node_graph(total_nodes);
    long graph_count = 0;
    for (std::size_t i = 0; i < total_nodes; ++i) {
        node_graph[i] = parse_long(indicator_lines[i], indicator_file, i);
        if (node_graph[i] < 1) {
            throw ConsistencyError(indicator_file.string() + ": graph ids must be >= 1");
        }
        graph_count = std::max(graph_count, node_graph[i]);
    }

    const auto label_lines = read_lines(graph_labels_file);
    if (static_cast<long>(label_lines.size()) != graph_count) {
        throw ConsistencyError(graph_labels_file.string() + ": " + std::to_string(label_lines.size()) +
                               " labels for " + std::to_string(graph_count) + " graphs");
    }
    std::vector<long> raw_labels(graph_count);
    for (std::size_t i = 0; i < label_lines.size(); ++i) {
        raw_labels[i] = parse_long(label_lines[i], graph_labels_file, i);
    }

    // local ids: 0-indexed within each graph, in global-id order
    std::vector<NodeId> local_id(total_nodes);
    std::vector<NodeId> graph_size(graph_count, 0);
    for (std::size_t i = 0; i < total_nodes; ++i) {
        const long gi = node_graph[i] - 1;
        local_id[i] = graph_size[gi]++;
    }

    std::vector<std::vector<std::pair<NodeId, NodeId>>> edges(graph_count);
    std::vector<std::vector<double>> weights(graph_count);

    const auto adj_lines = read_lines(adj_file);
    std::vector<double> edge_attrs;
    bool have_weights = std::filesystem::exists(edge_attr_file);
    if (have_weights) {
        const auto attr_lines = read_lines(edge_attr_file);
        if (attr_lines.size() != adj_lines.size()) {
            throw ConsistencyError(edge_attr_file.string() + ": " + std::to_string(attr_lines.size()) +
                                   " attributes for " + std::to_string(adj_lines.size()) + " edges");
        }
        edge_attrs.resize(attr_lines.size());
        for (std::size_t i = 0; i < attr_lines.size(); ++i) {
            // only the first column is used as a scalar weight
            std::string first = attr_lines[i].substr(0, attr_lines[i].find(','));
            edge_attrs[i] = parse_double(first, edge_attr_file, i);
        }
    }

    for (std::size_t i = 0; i < adj_lines.size(); ++i) {
        const auto& line = adj_lines[i];
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw FormatError(adj_file.string() + ":" + std::to_string(i + 1) +
                              ": expected \"i, j\", got \"" + line + "\"");
        }
        const long a = parse_long(line.substr(0, comma), adj_file, i);
        const long b = parse_long(line.substr(comma + 1), adj_file, i);
        if (a < 1 || a > static_cast<long>(total_nodes) || b < 1 || b > static_cast<long>(total_nodes)) {
            throw ConsistencyError(adj_file.string() + ":" + std::to_string(i + 1) +
                                   ": node id outside indicator range");
        }
        const long ga = node_graph[a - 1];
        const long gb = node_graph[b - 1];
        if (ga != gb) {
            throw ConsistencyError(adj_file.string() + ":" + std::to_string(i + 1) +
                                   ": edge crosses graphs " + std::to_string(ga) + " and " +
                                   std::to_string(gb));
        }
        edges[ga - 1].emplace_back(local_id[a - 1], local_id[b - 1]);
        if (have_weights) weights[ga - 1].push_back(edge_attrs[i]);
    }

    std::optional<std::vector<int>> all_node_labels;
    if (std::filesystem::exists(node_labels_file)) {
        const auto node_label_lines = read_lines(node_labels_file);
        if (node_label_lines.size() != total_nodes) {
            throw ConsistencyError(node_labels_file.string() + ": " +
                                   std::to_string(node_label_lines.size()) + " labels for " +
                                   std::to_string(total_nodes) + " nodes");
        }
        all_node_labels.emplace(total_nodes);
        for (std::size_t i = 0; i < total_nodes; ++i) {
            (*all_node_labels)[i] = static_cast<int>(parse_long(node_label_lines[i], node_labels_file, i));
        }
    }

    // remap raw graph labels to 0..C-1 preserving sorted order
    std::set<long> distinct(raw_labels.begin(), raw_labels.end());
    std::map<long, int> label_map;
    int next = 0;
    for (long v : distinct) label_map[v] = next++;

    Dataset ds;
    ds.name = name;
    ds.graphs.reserve(graph_count);
    ds.class_labels.reserve(graph_count);

    std::vector<std::vector<int>> per_graph_labels(graph_count);
    if (all_node_labels) {
        for (long gi = 0; gi < graph_count; ++gi) {
            per_graph_labels[gi].resize(graph_size[gi]);
        }
        for (std::size_t i = 0; i < total_nodes; ++i) {
            per_graph_labels[node_graph[i] - 1][local_id[i]] = (*all_node_labels)[i];
        }
    }

    for (long gi = 0; gi < graph_count; ++gi) {
        std::optional<std::vector<int>> labels;
        if (all_node_labels) labels = std::move(per_graph_labels[gi]);
        std::optional<std::vector<double>> ws;
        if (have_weights) ws = std::move(weights[gi]);
        ds.graphs.emplace_back(graph_size[gi], edges[gi], std::move(labels), std::move(ws));
        ds.class_labels.push_back(label_map.at(raw_labels[gi]));
    }
    ds.validate();
    return ds;
}

void write_benchmark_dataset(const Dataset& d, const std::filesystem::path& directory) {
    d.validate();
    std::filesystem::create_directories(directory);
    const auto open = [&](const std::string& suffix) {
        auto path = directory / (d.name + suffix);
        std::ofstream out(path);
        if (!out) throw IoError("cannot write " + path.string());
        return out;
    };

    bool any_node_labels = false;
    bool any_weights = false;
    for (const auto& g : d.graphs) {
        any_node_labels = any_node_labels || g.labeled();
        any_weights = any_weights || g.weighted();
    }

    auto adj = open("_A.txt");
    auto indicator = open("_graph_indicator.txt");
    auto labels = open("_graph_labels.txt");
    std::ofstream node_labels, edge_attrs;
    if (any_node_labels) node_labels = open("_node_labels.txt");
    if (any_weights) edge_attrs = open("_edge_attributes.txt");

    long base = 0;
    for (std::size_t gi = 0; gi < d.graphs.size(); ++gi) {
        const Graph& g = d.graphs[gi];
        labels << d.class_labels[gi] << "\n";
        for (NodeId n = 0; n < g.node_count(); ++n) {
            indicator << (gi + 1) << "\n";
            if (any_node_labels) node_labels << (g.labeled() ? g.node_label(n) : 0) << "\n";
        }
        // both directions, matching the shipped benchmark layout
        for (const auto& [u, v] : g.edges()) {
            adj << (base + u + 1) << ", " << (base + v + 1) << "\n";
            adj << (base + v + 1) << ", " << (base + u + 1) << "\n";
            if (any_weights) {
                const double w = g.weighted() ? g.edge_weight(u, v) : 1.0;
                edge_attrs << w << "\n" << w << "\n";
            }
        }
        base += g.node_count();
    }
}

std::string detect_dataset_name(const std::filesystem::path& directory) {
    if (!std::filesystem::is_directory(directory)) {
        throw IoError("not a directory: " + directory.string());
    }
    std::vector<std::string> candidates;
    for (const auto& entry : std::filesystem::directory_iterator(directory)) {
        const auto fname = entry.path().filename().string();
        const std::string suffix = "_A.txt";
        if (fname.size() > suffix.size() &&
            fname.compare(fname.size() - suffix.size(), suffix.size(), suffix) == 0) {
            candidates.push_back(fname.substr(0, fname.size() - suffix.size()));
        }
    }
    if (candidates.empty()) {
        throw FormatError("no *_A.txt file in " + directory.string());
    }
    if (candidates.size() > 1) {
        throw FormatError("multiple datasets in " + directory.string() + "; pass a name explicitly");
    }
    return candidates.front();
}

}  // namespace egograph
