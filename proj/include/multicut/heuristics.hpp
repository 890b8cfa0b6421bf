#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "multicut/core.hpp"

namespace mc {

struct HeuristicResult {
  EdgeLabeling labeling; // over the pairs of the complete instance
  double value = 0.0;
  std::uint64_t iterations = 0;
  double wall_time = 0.0; // seconds
};

// One merge performed by the additive contraction loop, in the node labels of
// the input (each cluster is named by its smallest member).
struct MergeStep {
  Node a;
  Node b;
  double weight;
};

// Greedy additive contraction on a dense symmetric weight table given in
// lexicographic pair order: merge the heaviest pair while its weight is
// positive, summing weights of parallel pairs. Ties go to the
// lexicographically smallest pair of cluster labels. Shared by gaec and the
// single-pass GNN solver, which feeds logits instead of costs.
Partition additive_contraction(std::size_t n, std::span<const double> weights,
                               std::vector<MergeStep>* steps = nullptr);

HeuristicResult gaec(const CompleteInstance& ci);
HeuristicResult greedy_fixation(const CompleteInstance& ci);
HeuristicResult mutex_watershed(const CompleteInstance& ci);

// Kernighan-Lin with joins as a local search over node relocations between
// cluster pairs plus cluster merges. Not a bit-exact port of any reference
// implementation; see README.
HeuristicResult kernighan_lin_joins(const CompleteInstance& ci, const Partition& init);
HeuristicResult kernighan_lin_joins(const CompleteInstance& ci); // init = gaec

} // namespace mc
