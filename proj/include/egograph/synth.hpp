#ifndef EGOGRAPH_SYNTH_HPP
#define EGOGRAPH_SYNTH_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "egograph/graph.hpp"

namespace egograph {

// node label values used by the compound generators
inline constexpr int kLabelCarbon = 0;
inline constexpr int kLabelHydrogen = 1;
inline constexpr int kLabelOxygen = 2;
inline const std::vector<std::string> kAtomNames = {"C", "H", "O"};

struct CompoundSpec {
    enum class Variant { alkane, alcohol, isomer };

    int carbon_count = 1;           // main-chain carbons
    Variant variant = Variant::alkane;
    int branch_position = 1;        // isomer only, 1-based chain position
    bool include_hydrogens = true;
    std::uint64_t vertex_permutation_seed = 0;  // 0 keeps construction order
};

/// Straight carbon chain with hydrogens filling valence 4.
Graph gen_alkane(const CompoundSpec& spec);

/// Alkane with one hydrogen of the last chain carbon replaced by O-H.
Graph gen_alcohol(const CompoundSpec& spec);

/// Main chain with a methyl branch at spec.branch_position; symmetric
/// exactly when the branch sits at the center of an odd chain.
Graph gen_isomer(const CompoundSpec& spec);

/// Stochastic Kronecker graph: every ordered pair (i, j), i != j, is
/// sampled with the power-fold Kronecker product probability, then the
/// result is symmetrized. Node count is s^power for an s x s initiator.
Graph gen_kronecker(const std::vector<std::vector<double>>& initiator, int power,
                    std::uint64_t seed);

struct CompoundDatasets {
    Dataset alcohol_task;  // class 0 alkane, class 1 alcohol
    Dataset isomer_task;   // class 0 symmetric, class 1 asymmetric
};

/// Balanced two-class datasets with randomized vertex orderings. Carbon
/// counts are drawn uniformly from `alkane_sizes` for the alcohol task and
/// chain lengths from `isomer_sizes` for the isomer task (symmetric
/// examples use the odd lengths of that range).
CompoundDatasets build_compound_datasets(std::pair<int, int> alkane_sizes, int per_class,
                                         std::uint64_t seed, bool include_hydrogens = true,
                                         std::pair<int, int> isomer_sizes = {9, 15});

/// Two-class scale-free dataset: both classes are stochastic Kronecker
/// graphs, drawn from initiators of different density, with powers sampled
/// from [power_min, power_max].
Dataset build_kronecker_dataset(int power_min, int power_max, int per_class, std::uint64_t seed);

}  // namespace egograph

#endif
