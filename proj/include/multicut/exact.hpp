#pragma once

#include <cstdint>
#include <limits>

#include "multicut/core.hpp"

namespace mc {

struct ExactResult {
  EdgeLabeling labeling;
  double value = 0.0;
  bool proven_optimal = false;
  std::uint64_t nodes_explored = 0;
};

inline constexpr std::size_t kBruteForceMaxNodes = 12;

// Enumerates every set partition (restricted-growth strings). Clusters of the
// optimum that are disconnected in a sparse input are split into their
// components, which leaves the cost unchanged. Throws SizeGuardError for n > 12.
ExactResult brute_force(const Instance& inst);

// Depth-first branch-and-bound over pair variables with triangle propagation
// and the bound "fixed cost + sum of negative free costs". The incumbent starts
// from GAEC. Labeling is over the pairs of ci in lexicographic order.
ExactResult branch_and_bound(const CompleteInstance& ci,
                             double time_limit_seconds = std::numeric_limits<double>::infinity());

} // namespace mc
