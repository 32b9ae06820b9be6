#ifndef EGOGRAPH_DOT_EXPORT_HPP
#define EGOGRAPH_DOT_EXPORT_HPP

#include <filesystem>
#include <string>

#include "egograph/critical.hpp"

namespace egograph {

/// Renders a critical structure as an undirected DOT graph. Node width and
/// edge penwidth are scaled linearly from importances into [0.2, 4.0];
/// anything below 1e-6 of the maximum renders at minimum size. Node labels
/// come from `label_names` (indexed by node label) when provided and the
/// graph is labeled.
std::string critical_structure_dot(const CriticalStructure& cs,
                                   const std::vector<std::string>& label_names = {});

void export_dot(const CriticalStructure& cs, const std::filesystem::path& path,
                const std::vector<std::string>& label_names = {});

/// CSV dumps: "node,importance" and "u,v,importance".
void export_importance_csv(const CriticalStructure& cs, const std::filesystem::path& node_csv,
                           const std::filesystem::path& edge_csv);

}  // namespace egograph

#endif
