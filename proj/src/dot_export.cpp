#include "egograph/dot_export.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "egograph/errors.hpp"

namespace egograph {

namespace {

constexpr double kMinSize = 0.2;
constexpr double kMaxSize = 4.0;

double scaled(double importance, double max_importance) {
    if (max_importance <= 0.0 || importance < 1e-6 * max_importance) return kMinSize;
    return kMinSize + (importance / max_importance) * (kMaxSize - kMinSize);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("cannot write " + path.string());
        out << content;
        if (!out) throw IoError("short write on " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

std::string critical_structure_dot(const CriticalStructure& cs,
                                   const std::vector<std::string>& label_names) {
    if (cs.base == nullptr) throw ArgumentError("critical structure has no base graph");
    const Graph& g = *cs.base;

    double max_node = 0.0;
    for (double v : cs.node_importance) max_node = std::max(max_node, v);
    double max_edge = 0.0;
    for (const auto& [e, v] : cs.edge_importance) max_edge = std::max(max_edge, v);

    std::ostringstream out;
    out << "graph critical {\n";
    out << "  node [shape=circle, style=filled, fillcolor=grey90, fixedsize=true];\n";
    for (NodeId n = 0; n < g.node_count(); ++n) {
        std::string label = std::to_string(n);
        if (g.labeled() && !label_names.empty()) {
            const int l = g.node_label(n);
            if (l >= 0 && l < static_cast<int>(label_names.size())) label = label_names[l];
        }
        out << "  n" << n << " [label=\"" << label << "\", width="
            << fmt(scaled(cs.node_importance.empty() ? 0.0 : cs.node_importance[n], max_node))
            << "];\n";
    }
    for (const auto& [u, v] : g.edges()) {
        double imp = 0.0;
        auto it = cs.edge_importance.find({u, v});
        if (it != cs.edge_importance.end()) imp = it->second;
        out << "  n" << u << " -- n" << v << " [penwidth=" << fmt(scaled(imp, max_edge)) << "];\n";
    }
    out << "}\n";
    return out.str();
}

void export_dot(const CriticalStructure& cs, const std::filesystem::path& path,
                const std::vector<std::string>& label_names) {
    atomic_write(path, critical_structure_dot(cs, label_names));
}

void export_importance_csv(const CriticalStructure& cs, const std::filesystem::path& node_csv,
                           const std::filesystem::path& edge_csv) {
    if (cs.base == nullptr) throw ArgumentError("critical structure has no base graph");
    std::ostringstream nodes;
    nodes << "node,importance\n";
    for (std::size_t n = 0; n < cs.node_importance.size(); ++n) {
        nodes << n << "," << cs.node_importance[n] << "\n";
    }
    std::ostringstream edges;
    edges << "u,v,importance\n";
    for (const auto& [u, v] : cs.base->edges()) {
        double imp = 0.0;
        auto it = cs.edge_importance.find({u, v});
        if (it != cs.edge_importance.end()) imp = it->second;
        edges << u << "," << v << "," << imp << "\n";
    }
    atomic_write(node_csv, nodes.str());
    atomic_write(edge_csv, edges.str());
}

}  // namespace egograph
