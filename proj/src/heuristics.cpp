#include "multicut/heuristics.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <queue>
#include <string>

#include "multicut/error.hpp"
#include "multicut/union_find.hpp"

namespace mc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Dense symmetric working copy of a pair table. Alive node indices double as
// cluster labels: merges always keep the smaller index, which is then the
// smallest original member of the merged cluster.
struct DenseGraph {
  explicit DenseGraph(std::size_t n, std::span<const double> lex)
      : n(n), w(n * n, 0.0), alive(n, 1), version(n, 0), clusters(n) {
    for (std::size_t i = 0, e = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j, ++e) w[i * n + j] = w[j * n + i] = lex[e];
  }

  double& at(std::size_t a, std::size_t b) { return w[a * n + b]; }

  std::size_t n;
  std::vector<double> w;
  std::vector<char> alive;
  std::vector<std::uint32_t> version;
  UnionFind clusters;
};

struct HeapEntry {
  double key;
  Node a; // a < b, both alive node indices at push time
  Node b;
  std::uint32_t va;
  std::uint32_t vb;
};

// Larger key first; ties to the lexicographically smallest pair.
struct HeapOrder {
  bool operator()(const HeapEntry& x, const HeapEntry& y) const {
    if (x.key != y.key) return x.key < y.key;
    if (x.a != y.a) return x.a > y.a;
    return x.b > y.b;
  }
};

using Heap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapOrder>;

bool stale(const DenseGraph& g, const HeapEntry& e) {
  return !g.alive[e.a] || !g.alive[e.b] || g.version[e.a] != e.va || g.version[e.b] != e.vb;
}

void push(Heap& heap, const DenseGraph& g, std::size_t a, std::size_t b, double key) {
  if (a > b) std::swap(a, b);
  heap.push({key, static_cast<Node>(a), static_cast<Node>(b), g.version[a], g.version[b]});
}

Partition partition_of(DenseGraph& g) {
  std::vector<std::uint32_t> roots(g.n);
  for (std::size_t v = 0; v < g.n; ++v) roots[v] = static_cast<std::uint32_t>(g.clusters.find(v));
  return Partition(std::move(roots));
}

HeuristicResult finish(const CompleteInstance& ci, const Partition& p, std::uint64_t iterations,
                       Clock::time_point t0) {
  HeuristicResult r;
  r.labeling = partition_to_multicut(ci, p);
  r.value = objective(ci, r.labeling);
  r.iterations = iterations;
  r.wall_time = seconds_since(t0);
  return r;
}

enum class MergeRule { Sum, Max };

// Shared loop of greedy fixation and mutex watershed: pairs are processed by
// decreasing |weight|; attractive pairs merge unless a mutex separates them,
// repulsive pairs record a mutex.
HeuristicResult fixation_loop(const CompleteInstance& ci, MergeRule rule) {
  const auto t0 = Clock::now();
  const std::size_t n = ci.node_count();
  const auto lex = ci.costs();
  DenseGraph g(n, lex);
  std::vector<char> mutex(n * n, 0);
  Heap heap;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (g.at(i, j) != 0.0) push(heap, g, i, j, std::abs(g.at(i, j)));

  std::uint64_t iterations = 0;
  while (!heap.empty()) {
    const HeapEntry top = heap.top();
    heap.pop();
    if (stale(g, top)) continue;
    ++iterations;
    const std::size_t a = top.a;
    const std::size_t b = top.b;
    const double w = g.at(a, b);
    if (w < 0.0) {
      mutex[a * n + b] = mutex[b * n + a] = 1;
      continue;
    }
    if (mutex[a * n + b]) continue; // stays cut

    for (std::size_t k = 0; k < n; ++k) {
      if (!g.alive[k] || k == a || k == b) continue;
      const double x = g.at(a, k);
      const double y = g.at(b, k);
      // Max keeps the strongest interaction; equal strengths resolve to the repulsive one.
      const double merged = rule == MergeRule::Sum ? x + y
                            : std::abs(x) != std::abs(y) ? (std::abs(x) > std::abs(y) ? x : y)
                                                         : std::min(x, y);
      g.at(a, k) = g.at(k, a) = merged;
      const char m = mutex[a * n + k] | mutex[b * n + k];
      mutex[a * n + k] = mutex[k * n + a] = m;
    }
    g.alive[b] = 0;
    g.clusters.merge(a, b);
    ++g.version[a];
    for (std::size_t k = 0; k < n; ++k)
      if (g.alive[k] && k != a && g.at(a, k) != 0.0) push(heap, g, a, k, std::abs(g.at(a, k)));
  }
  return finish(ci, partition_of(g), iterations, t0);
}

} // namespace

Partition additive_contraction(std::size_t n, std::span<const double> weights, std::vector<MergeStep>* steps) {
  if (weights.size() != pair_count(n))
    throw InputError("weight table has " + std::to_string(weights.size()) + " entries, expected " +
                     std::to_string(pair_count(n)));
  DenseGraph g(n, weights);
  Heap heap;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (g.at(i, j) > 0.0) push(heap, g, i, j, g.at(i, j));

  while (!heap.empty()) {
    const HeapEntry top = heap.top();
    heap.pop();
    if (stale(g, top)) continue;
    const std::size_t a = top.a; // keep the smaller label
    const std::size_t b = top.b;
    if (steps) steps->push_back({top.a, top.b, top.key});
    for (std::size_t k = 0; k < n; ++k) {
      if (!g.alive[k] || k == a || k == b) continue;
      const double merged = g.at(a, k) + g.at(b, k);
      g.at(a, k) = g.at(k, a) = merged;
    }
    g.alive[b] = 0;
    g.clusters.merge(a, b);
    ++g.version[a];
    for (std::size_t k = 0; k < n; ++k)
      if (g.alive[k] && k != a && g.at(a, k) > 0.0) push(heap, g, a, k, g.at(a, k));
  }
  return partition_of(g);
}

HeuristicResult gaec(const CompleteInstance& ci) {
  const auto t0 = Clock::now();
  std::vector<MergeStep> steps;
  const auto p = additive_contraction(ci.node_count(), ci.costs(), &steps);
  return finish(ci, p, steps.size(), t0);
}

HeuristicResult greedy_fixation(const CompleteInstance& ci) { return fixation_loop(ci, MergeRule::Sum); }

HeuristicResult mutex_watershed(const CompleteInstance& ci) { return fixation_loop(ci, MergeRule::Max); }

HeuristicResult kernighan_lin_joins(const CompleteInstance& ci, const Partition& init) {
  const auto t0 = Clock::now();
  const std::size_t n = ci.node_count();
  if (init.node_count() != n)
    throw InputError("initial partition covers " + std::to_string(init.node_count()) + " nodes, instance has " +
                     std::to_string(n));
  constexpr double eps = 1e-9;

  std::vector<std::uint32_t> cl(init.ids().begin(), init.ids().end());
  std::size_t k = init.cluster_count();
  std::uint64_t iterations = 0;

  auto compact = [&] {
    Partition p(cl);
    cl.assign(p.ids().begin(), p.ids().end());
    k = p.cluster_count();
  };

  // One KL pass between clusters a and b (b == k means a fresh empty cluster).
  // Returns true if a strictly improving prefix of moves was applied.
  auto kl_pass = [&](std::uint32_t a, std::uint32_t b) {
    std::vector<Node> movable;
    for (std::size_t v = 0; v < n; ++v)
      if (cl[v] == a || cl[v] == b) movable.push_back(static_cast<Node>(v));
    std::vector<std::uint32_t> side(movable.size());
    std::vector<double> gain(movable.size(), 0.0);
    for (std::size_t x = 0; x < movable.size(); ++x) side[x] = cl[movable[x]];
    for (std::size_t x = 0; x < movable.size(); ++x)
      for (std::size_t y = 0; y < movable.size(); ++y) {
        if (x == y) continue;
        const double c = ci.cost(movable[x], movable[y]);
        gain[x] += side[x] == side[y] ? -c : c;
      }

    std::vector<char> locked(movable.size(), 0);
    std::vector<std::size_t> order;
    double cumulative = 0.0, best = 0.0;
    std::size_t best_len = 0;
    for (std::size_t step = 0; step < movable.size(); ++step) {
      std::size_t pick = movable.size();
      for (std::size_t x = 0; x < movable.size(); ++x)
        if (!locked[x] && (pick == movable.size() || gain[x] > gain[pick])) pick = x;
      cumulative += gain[pick];
      locked[pick] = 1;
      order.push_back(pick);
      const std::uint32_t from = side[pick];
      side[pick] = from == a ? b : a;
      for (std::size_t y = 0; y < movable.size(); ++y) {
        if (y == pick) continue;
        const double c = ci.cost(movable[pick], movable[y]);
        gain[y] += side[y] == from ? 2.0 * c : -2.0 * c;
      }
      if (cumulative > best + eps) {
        best = cumulative;
        best_len = order.size();
      }
    }
    if (best_len == 0) return false;
    for (std::size_t s = 0; s < best_len; ++s) {
      const Node v = movable[order[s]];
      cl[v] = cl[v] == a ? b : a;
    }
    return true;
  };

  auto join_gain = [&](std::uint32_t a, std::uint32_t b) {
    double g = 0.0;
    for (std::size_t u = 0; u < n; ++u)
      if (cl[u] == a)
        for (std::size_t v = 0; v < n; ++v)
          if (cl[v] == b) g += ci.cost(u, v);
    return g;
  };

  bool improved = true;
  while (improved) {
    improved = false;
    for (std::uint32_t a = 0; a < k && !improved; ++a) {
      for (std::uint32_t b = a + 1; b <= k && !improved; ++b) {
        ++iterations;
        if (kl_pass(a, b)) {
          improved = true;
        } else if (b < k && join_gain(a, b) > eps) {
          for (auto& c : cl)
            if (c == b) c = a;
          improved = true;
        }
      }
    }
    if (improved) compact();
  }
  return finish(ci, Partition(cl), iterations, t0);
}

HeuristicResult kernighan_lin_joins(const CompleteInstance& ci) {
  const auto init = additive_contraction(ci.node_count(), ci.costs());
  return kernighan_lin_joins(ci, init);
}

} // namespace mc
