#include "egograph/wl.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "egograph/errors.hpp"

namespace egograph {

int WLColoring::frequency(int color) const {
    auto it = color_frequencies.find(color);
    return it == color_frequencies.end() ? 0 : it->second;
}

int WLColoring::color_count(int t) const {
    if (t < 0 || t >= static_cast<int>(colors.size())) {
        throw ArgumentError("WL iteration index out of range");
    }
    std::set<int> distinct(colors[t].begin(), colors[t].end());
    return static_cast<int>(distinct.size());
}

WLColoring wl_refine(const Graph& g, int iterations) {
    if (iterations < 1) {
        throw ArgumentError("wl_refine needs at least 1 iteration");
    }
    const NodeId n = g.node_count();

    WLColoring out;
    out.colors.reserve(iterations + 1);

    // iteration 0: canonical ids from sorted raw labels, or uniform color
    std::vector<int> base(n, 0);
    if (g.labeled()) {
        std::set<int> distinct(g.node_labels().begin(), g.node_labels().end());
        std::map<int, int> remap;
        int next = 0;
        for (int v : distinct) remap[v] = next++;
        for (NodeId i = 0; i < n; ++i) base[i] = remap.at(g.node_label(i));
    }
    out.colors.push_back(std::move(base));

    using Signature = std::pair<int, std::vector<int>>;
    for (int t = 1; t <= iterations; ++t) {
        const std::vector<int>& prev = out.colors.back();
        std::vector<Signature> sigs(n);
        for (NodeId i = 0; i < n; ++i) {
            std::vector<int> nbr_colors;
            nbr_colors.reserve(g.neighbors(i).size());
            for (NodeId m : g.neighbors(i)) nbr_colors.push_back(prev[m]);
            std::sort(nbr_colors.begin(), nbr_colors.end());
            sigs[i] = {prev[i], std::move(nbr_colors)};
        }
        std::map<Signature, int> ids;
        for (NodeId i = 0; i < n; ++i) ids.emplace(sigs[i], 0);
        int next = 0;
        for (auto& [sig, id] : ids) id = next++;
        std::vector<int> colors(n);
        for (NodeId i = 0; i < n; ++i) colors[i] = ids.at(sigs[i]);
        out.colors.push_back(std::move(colors));
    }

    for (int c : out.colors.back()) ++out.color_frequencies[c];
    return out;
}

}  // namespace egograph
