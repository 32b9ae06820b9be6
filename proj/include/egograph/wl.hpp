#ifndef EGOGRAPH_WL_HPP
#define EGOGRAPH_WL_HPP

#include <unordered_map>
#include <vector>

#include "egograph/graph.hpp"

namespace egograph {

/// Result of 1-dimensional Weisfeiler-Lehman color refinement.
///
/// Color ids are canonical: at every iteration the distinct refinement
/// signatures are sorted and numbered 0..M-1 in that order, so two nodes
/// (possibly in different graphs) share a color exactly when their
/// signatures match. Relabeling a graph's vertices therefore permutes
/// which node holds which color but never changes the color values.
struct WLColoring {
    std::vector<std::vector<int>> colors;        // colors[t][n], t = 0..iterations
    std::unordered_map<int, int> color_frequencies;  // final-iteration counts

    int iterations() const { return static_cast<int>(colors.size()) - 1; }
    const std::vector<int>& final_colors() const { return colors.back(); }
    int frequency(int color) const;
    /// Number of distinct colors at iteration t.
    int color_count(int t) const;
};

/// Runs `iterations` rounds of refinement (iterations >= 1). Iteration 0
/// colors come from node labels when present, otherwise every node starts
/// with color 0. Each round recolors by (own color, sorted multiset of
/// neighbor colors).
WLColoring wl_refine(const Graph& g, int iterations);

}  // namespace egograph

#endif
