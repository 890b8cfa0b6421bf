#pragma once

// Fixtures and independent oracles shared by the unit tests and the
// acceptance runner. Nothing here calls the solvers under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "multicut/core.hpp"

namespace mc::testing {

// Seven-node example with a known optimum of -6 (after relabeling).
inline Instance golden_instance() {
  return Instance(7, {{0, 1, -1}, {0, 2, -4}, {1, 3, 3}, {1, 4, -5}, {2, 3, 1},
                      {3, 4, 2}, {4, 6, -1}, {5, 6, 2}, {4, 5, 4}, {1, 5, 2}});
}

inline std::vector<std::pair<Node, Node>> golden_cut() { return {{0, 1}, {0, 2}, {1, 4}, {1, 5}, {3, 4}}; }

inline EdgeLabeling golden_labeling(const Instance& inst) {
  EdgeLabeling x(inst.edge_count());
  for (auto [i, j] : golden_cut()) x[*inst.find_edge(i, j)] = 1;
  return x;
}

// Calls f on every set partition of n nodes (restricted growth strings).
inline void for_each_partition(std::size_t n, const std::function<void(const std::vector<std::uint32_t>&)>& f) {
  std::vector<std::uint32_t> a(n, 0);
  std::function<void(std::size_t, std::uint32_t)> rec = [&](std::size_t k, std::uint32_t used) {
    if (k == n) {
      f(a);
      return;
    }
    for (std::uint32_t c = 0; c <= used && c < n; ++c) {
      a[k] = c;
      rec(k + 1, std::max(used, c + 1));
    }
  };
  if (n == 0) f(a);
  else rec(0, 0);
}

// Minimum of sum of costs over edges between distinct blocks, over all set
// partitions; equals the multicut optimum because splitting a disconnected
// block never changes the cost.
inline double oracle_optimum(const Instance& inst) {
  double best = std::numeric_limits<double>::infinity();
  for_each_partition(inst.node_count(), [&](const std::vector<std::uint32_t>& a) {
    double v = 0.0;
    for (const auto& e : inst.edges())
      if (a[e.i] != a[e.j]) v += e.cost;
    best = std::min(best, v);
  });
  return best;
}

inline double direct_objective(const Instance& inst, const EdgeLabeling& x) {
  double v = 0.0;
  for (std::size_t e = 0; e < inst.edge_count(); ++e) v += inst.edge(e).cost * x[e];
  return v;
}

// Random graph with edge probability p and integer costs in [lo, hi].
inline Instance random_sparse(std::mt19937_64& rng, std::size_t n, double p, int lo = -5, int hi = 5) {
  std::bernoulli_distribution keep(p);
  std::uniform_int_distribution<int> cost(lo, hi);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (keep(rng)) edges.push_back({static_cast<Node>(i), static_cast<Node>(j), static_cast<double>(cost(rng))});
  return Instance(n, std::move(edges));
}

inline Instance random_complete(std::mt19937_64& rng, std::size_t n, int lo = -5, int hi = 5) {
  return random_sparse(rng, n, 1.0, lo, hi);
}

inline Instance random_continuous(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> cost(-1.0, 1.0);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({static_cast<Node>(i), static_cast<Node>(j), cost(rng)});
  return Instance(n, std::move(edges));
}

inline EdgeLabeling random_labeling(std::mt19937_64& rng, std::size_t m) {
  EdgeLabeling x(m);
  for (std::size_t e = 0; e < m; ++e) x[e] = static_cast<std::uint8_t>(rng() & 1);
  return x;
}

// Labeling induced by random cluster labels; always a multicut.
inline EdgeLabeling random_feasible(std::mt19937_64& rng, const Instance& inst) {
  const std::size_t k = 1 + rng() % std::max<std::size_t>(1, inst.node_count());
  std::vector<std::uint32_t> label(inst.node_count());
  for (auto& l : label) l = static_cast<std::uint32_t>(rng() % k);
  EdgeLabeling x(inst.edge_count());
  for (std::size_t e = 0; e < inst.edge_count(); ++e) x[e] = label[inst.edge(e).i] != label[inst.edge(e).j];
  // Joined components may merge blocks; the component closure is feasible.
  std::vector<std::uint32_t> comp(inst.node_count());
  for (std::size_t v = 0; v < comp.size(); ++v) comp[v] = static_cast<std::uint32_t>(v);
  std::function<std::uint32_t(std::uint32_t)> find = [&](std::uint32_t v) {
    return comp[v] == v ? v : comp[v] = find(comp[v]);
  };
  for (std::size_t e = 0; e < inst.edge_count(); ++e)
    if (!x[e]) comp[find(inst.edge(e).i)] = find(inst.edge(e).j);
  for (std::size_t e = 0; e < inst.edge_count(); ++e) x[e] = find(inst.edge(e).i) != find(inst.edge(e).j);
  return x;
}

// Node permutation applied to a complete cost vector (lexicographic order).
inline std::vector<double> permute_costs(std::size_t n, const std::vector<double>& costs, const std::vector<Node>& pi) {
  std::vector<double> out(costs.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out[pair_index(n, pi[i], pi[j])] = costs[pair_index(n, i, j)];
  return out;
}

} // namespace mc::testing
