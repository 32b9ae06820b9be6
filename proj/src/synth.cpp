#include "egograph/synth.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "egograph/errors.hpp"

namespace egograph {

namespace {

struct Builder {
    std::vector<std::pair<NodeId, NodeId>> edges;
    std::vector<int> labels;

    NodeId add(int label) {
        labels.push_back(label);
        return static_cast<NodeId>(labels.size() - 1);
    }
    void bond(NodeId a, NodeId b) { edges.emplace_back(a, b); }

    Graph finish(std::uint64_t permutation_seed) const {
        const NodeId n = static_cast<NodeId>(labels.size());
        std::vector<NodeId> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        if (permutation_seed != 0) {
            std::mt19937_64 rng(permutation_seed);
            std::shuffle(perm.begin(), perm.end(), rng);
        }
        std::vector<std::pair<NodeId, NodeId>> e;
        e.reserve(edges.size());
        for (auto [a, b] : edges) e.emplace_back(perm[a], perm[b]);
        std::vector<int> l(n);
        for (NodeId i = 0; i < n; ++i) l[perm[i]] = labels[i];
        return Graph(n, e, std::move(l));
    }
};

// chain carbons plus an optional extra heavy neighbor map; hydrogens fill
// each carbon to valence 4 and each oxygen to valence 2
void saturate(Builder& b, const std::vector<NodeId>& heavy, const std::vector<int>& heavy_degree,
              bool include_hydrogens) {
    if (!include_hydrogens) return;
    for (std::size_t i = 0; i < heavy.size(); ++i) {
        const int valence = b.labels[heavy[i]] == kLabelOxygen ? 2 : 4;
        for (int h = heavy_degree[i]; h < valence; ++h) {
            const NodeId hn = b.add(kLabelHydrogen);
            b.bond(heavy[i], hn);
        }
    }
}

Builder carbon_chain(int carbons) {
    Builder b;
    NodeId prev = -1;
    for (int i = 0; i < carbons; ++i) {
        const NodeId c = b.add(kLabelCarbon);
        if (prev >= 0) b.bond(prev, c);
        prev = c;
    }
    return b;
}

}  // namespace

Graph gen_alkane(const CompoundSpec& spec) {
    if (spec.carbon_count < 1) throw ArgumentError("alkane needs at least 1 carbon");
    Builder b = carbon_chain(spec.carbon_count);
    std::vector<NodeId> heavy(spec.carbon_count);
    std::iota(heavy.begin(), heavy.end(), 0);
    std::vector<int> deg(spec.carbon_count);
    for (int i = 0; i < spec.carbon_count; ++i) {
        deg[i] = (i > 0 ? 1 : 0) + (i + 1 < spec.carbon_count ? 1 : 0);
    }
    saturate(b, heavy, deg, spec.include_hydrogens);
    return b.finish(spec.vertex_permutation_seed);
}

Graph gen_alcohol(const CompoundSpec& spec) {
    if (spec.carbon_count < 1) throw ArgumentError("alcohol needs at least 1 carbon");
    Builder b = carbon_chain(spec.carbon_count);
    const NodeId terminal = static_cast<NodeId>(spec.carbon_count - 1);
    const NodeId oxygen = b.add(kLabelOxygen);
    b.bond(terminal, oxygen);

    std::vector<NodeId> heavy;
    std::vector<int> deg;
    for (int i = 0; i < spec.carbon_count; ++i) {
        heavy.push_back(i);
        int d = (i > 0 ? 1 : 0) + (i + 1 < spec.carbon_count ? 1 : 0);
        if (i == spec.carbon_count - 1) d += 1;  // bond to oxygen
        deg.push_back(d);
    }
    heavy.push_back(oxygen);
    deg.push_back(1);  // oxygen takes one hydrogen
    saturate(b, heavy, deg, spec.include_hydrogens);
    return b.finish(spec.vertex_permutation_seed);
}

Graph gen_isomer(const CompoundSpec& spec) {
    if (spec.carbon_count < 1) throw ArgumentError("isomer needs at least 1 chain carbon");
    if (spec.branch_position < 1 || spec.branch_position > spec.carbon_count) {
        throw ArgumentError("branch position out of range");
    }
    Builder b = carbon_chain(spec.carbon_count);
    const NodeId branch_at = static_cast<NodeId>(spec.branch_position - 1);
    const NodeId methyl = b.add(kLabelCarbon);
    b.bond(branch_at, methyl);

    std::vector<NodeId> heavy;
    std::vector<int> deg;
    for (int i = 0; i < spec.carbon_count; ++i) {
        heavy.push_back(i);
        int d = (i > 0 ? 1 : 0) + (i + 1 < spec.carbon_count ? 1 : 0);
        if (i == branch_at) d += 1;
        deg.push_back(d);
    }
    heavy.push_back(methyl);
    deg.push_back(1);
    saturate(b, heavy, deg, spec.include_hydrogens);
    return b.finish(spec.vertex_permutation_seed);
}

Graph gen_kronecker(const std::vector<std::vector<double>>& initiator, int power,
                    std::uint64_t seed) {
    const std::size_t s = initiator.size();
    if (s < 1) throw ArgumentError("kronecker initiator must be non-empty");
    for (const auto& row : initiator) {
        if (row.size() != s) throw ArgumentError("kronecker initiator must be square");
        for (double p : row) {
            if (p < 0.0 || p > 1.0) throw ArgumentError("initiator entries must lie in [0, 1]");
        }
    }
    if (power < 1) throw ArgumentError("kronecker power must be >= 1");

    std::size_t n = 1;
    for (int t = 0; t < power; ++t) {
        if (n > (1ull << 22) / s) throw ArgumentError("kronecker graph too large");
        n *= s;
    }

    const auto entry = [&](std::size_t i, std::size_t j) {
        double p = 1.0;
        for (int t = 0; t < power; ++t) {
            p *= initiator[i % s][j % s];
            i /= s;
            j /= s;
        }
        return p;
    };

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (unit(rng) < entry(i, j)) {
                edges.emplace_back(static_cast<NodeId>(std::min(i, j)),
                                   static_cast<NodeId>(std::max(i, j)));
            }
        }
    }
    return Graph(static_cast<NodeId>(n), edges);  // constructor deduplicates
}

CompoundDatasets build_compound_datasets(std::pair<int, int> alkane_sizes, int per_class,
                                         std::uint64_t seed, bool include_hydrogens,
                                         std::pair<int, int> isomer_sizes) {
    if (per_class < 1) throw ArgumentError("per_class must be >= 1");
    if (alkane_sizes.first < 1 || alkane_sizes.second < alkane_sizes.first) {
        throw ArgumentError("bad alkane size range");
    }
    if (isomer_sizes.first < 3 || isomer_sizes.second < isomer_sizes.first) {
        throw ArgumentError("bad isomer size range (chains must have interior positions)");
    }
    if (isomer_sizes.second < 4) {
        throw ArgumentError("isomer size range has no asymmetric branch positions");
    }

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> alkane_size(alkane_sizes.first, alkane_sizes.second);

    CompoundDatasets out;
    out.alcohol_task.name = "alcohols";
    for (int i = 0; i < per_class; ++i) {
        CompoundSpec spec;
        spec.include_hydrogens = include_hydrogens;

        spec.variant = CompoundSpec::Variant::alkane;
        spec.carbon_count = alkane_size(rng);
        spec.vertex_permutation_seed = rng();
        out.alcohol_task.graphs.push_back(gen_alkane(spec));
        out.alcohol_task.class_labels.push_back(0);

        spec.variant = CompoundSpec::Variant::alcohol;
        spec.carbon_count = alkane_size(rng);
        spec.vertex_permutation_seed = rng();
        out.alcohol_task.graphs.push_back(gen_alcohol(spec));
        out.alcohol_task.class_labels.push_back(1);
    }

    // symmetric isomers need an odd chain with the branch dead-center
    std::vector<int> odd_lengths;
    for (int c = isomer_sizes.first; c <= isomer_sizes.second; ++c) {
        if (c % 2 == 1) odd_lengths.push_back(c);
    }
    if (odd_lengths.empty()) {
        throw ArgumentError("isomer size range holds no odd chain lengths");
    }
    std::uniform_int_distribution<std::size_t> odd_pick(0, odd_lengths.size() - 1);
    std::uniform_int_distribution<int> isomer_size(isomer_sizes.first, isomer_sizes.second);

    out.isomer_task.name = "isomers";
    for (int i = 0; i < per_class; ++i) {
        CompoundSpec spec;
        spec.include_hydrogens = include_hydrogens;
        spec.variant = CompoundSpec::Variant::isomer;

        spec.carbon_count = odd_lengths[odd_pick(rng)];
        spec.branch_position = (spec.carbon_count + 1) / 2;
        spec.vertex_permutation_seed = rng();
        out.isomer_task.graphs.push_back(gen_isomer(spec));
        out.isomer_task.class_labels.push_back(0);

        spec.carbon_count = isomer_size(rng);
        while (spec.carbon_count == 3) spec.carbon_count = isomer_size(rng);  // no off-center slot
        const int center = (spec.carbon_count + 1) / 2;
        std::uniform_int_distribution<int> pos(2, spec.carbon_count - 1);
        int p = pos(rng);
        while (spec.carbon_count % 2 == 1 && p == center) p = pos(rng);
        spec.branch_position = p;
        spec.vertex_permutation_seed = rng();
        out.isomer_task.graphs.push_back(gen_isomer(spec));
        out.isomer_task.class_labels.push_back(1);
    }
    return out;
}

Dataset build_kronecker_dataset(int power_min, int power_max, int per_class, std::uint64_t seed) {
    if (per_class < 1) throw ArgumentError("per_class must be >= 1");
    if (power_min < 1 || power_max < power_min) throw ArgumentError("bad power range");

    // same scale-free shape, different edge density per class
    const std::vector<std::vector<double>> sparse = {{0.9, 0.5}, {0.5, 0.1}};
    const std::vector<std::vector<double>> dense = {{0.9, 0.6}, {0.6, 0.2}};

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> power(power_min, power_max);

    Dataset out;
    out.name = "kronecker";
    for (int i = 0; i < per_class; ++i) {
        out.graphs.push_back(gen_kronecker(sparse, power(rng), rng()));
        out.class_labels.push_back(0);
        out.graphs.push_back(gen_kronecker(dense, power(rng), rng()));
        out.class_labels.push_back(1);
    }
    return out;
}

}  // namespace egograph
