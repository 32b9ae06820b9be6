#ifndef EGOGRAPH_DATASET_IO_HPP
#define EGOGRAPH_DATASET_IO_HPP

#include <filesystem>
#include <string>

#include "egograph/graph.hpp"

namespace egograph {

/// Reads the plain-text benchmark layout:
///   <name>_A.txt               comma-separated "i, j" pairs, 1-indexed global node ids
///   <name>_graph_indicator.txt one graph id per node line
///   <name>_graph_labels.txt    one class label per graph line
///   <name>_node_labels.txt     optional, one label per node line
///   <name>_edge_attributes.txt optional, one positive weight per edge line
/// Node ids come back 0-indexed per graph, edges deduplicated and symmetrized,
/// graph labels remapped to 0..C-1 preserving the sorted order of raw labels.
Dataset parse_benchmark_dataset(const std::filesystem::path& directory, const std::string& name);

/// Writes `d` in the same layout so it round-trips through
/// parse_benchmark_dataset. Class labels are emitted as-is (already 0..C-1).
void write_benchmark_dataset(const Dataset& d, const std::filesystem::path& directory);

/// Finds the dataset name in a directory by locating the unique *_A.txt file.
std::string detect_dataset_name(const std::filesystem::path& directory);

}  // namespace egograph

#endif
