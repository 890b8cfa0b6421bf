#include "multicut/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <tuple>
#include <unordered_map>

#include "multicut/error.hpp"
#include "multicut/union_find.hpp"

namespace mc {

namespace {

void require_size(std::size_t labeling, std::size_t edges) {
  if (labeling != edges)
    throw InputError("labeling has " + std::to_string(labeling) + " entries, instance has " +
                     std::to_string(edges) + " edges");
}

Partition components_of_joined(std::size_t n, std::span<const Edge> edges, const EdgeLabeling& x) {
  UnionFind uf(n);
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (x[e] == 0) uf.merge(edges[e].i, edges[e].j);
  std::vector<std::uint32_t> roots(n);
  for (std::size_t v = 0; v < n; ++v) roots[v] = static_cast<std::uint32_t>(uf.find(v));
  return Partition(std::move(roots));
}

} // namespace

Instance::Instance(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  for (auto& e : edges_) {
    if (e.i == e.j) throw InputError("self loop at node " + std::to_string(e.i));
    if (e.i > e.j) std::swap(e.i, e.j);
    if (e.j >= n_)
      throw InputError("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                       ") out of range for n=" + std::to_string(n_));
    if (!std::isfinite(e.cost)) throw InputError("non-finite edge cost");
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
  auto dup = std::adjacent_find(edges_.begin(), edges_.end(),
                                [](const Edge& a, const Edge& b) { return a.i == b.i && a.j == b.j; });
  if (dup != edges_.end())
    throw InputError("duplicate edge (" + std::to_string(dup->i) + "," + std::to_string(dup->j) + ")");
}

std::optional<std::size_t> Instance::find_edge(Node i, Node j) const {
  if (i > j) std::swap(i, j);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{i, j},
                             [](const Edge& e, const std::pair<Node, Node>& key) {
                               return std::tie(e.i, e.j) < std::tie(key.first, key.second);
                             });
  if (it == edges_.end() || it->i != i || it->j != j) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

std::size_t EdgeLabeling::cut_count() const noexcept {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

Partition::Partition(std::vector<std::uint32_t> labels) : ids_(std::move(labels)) {
  std::unordered_map<std::uint32_t, std::uint32_t> seen; // original label -> new id
  for (auto& id : ids_) {
    auto [it, inserted] = seen.try_emplace(id, static_cast<std::uint32_t>(seen.size()));
    id = it->second;
  }
  clusters_ = seen.size();
}

std::vector<std::vector<Node>> Partition::clusters() const {
  std::vector<std::vector<Node>> out(clusters_);
  for (std::size_t v = 0; v < ids_.size(); ++v) out[ids_[v]].push_back(static_cast<Node>(v));
  return out;
}

CompleteInstance::CompleteInstance(std::size_t n, std::span<const double> costs, bool normalized)
    : n_(n), lower_(mc::pair_count(n)), normalized_(normalized) {
  if (costs.size() != lower_.size())
    throw InputError("expected " + std::to_string(lower_.size()) + " pair costs, got " +
                     std::to_string(costs.size()));
  std::size_t idx = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!std::isfinite(costs[idx])) throw InputError("non-finite pair cost");
      lower_[slot(i, j)] = costs[idx++];
    }
}

std::vector<double> CompleteInstance::costs() const {
  std::vector<double> out;
  out.reserve(lower_.size());
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j) out.push_back(lower_[slot(i, j)]);
  return out;
}

double CompleteInstance::abs_cost_sum() const noexcept {
  double s = 0.0;
  for (double c : lower_) s += std::abs(c);
  return s;
}

Instance CompleteInstance::to_instance() const {
  std::vector<Edge> edges;
  edges.reserve(lower_.size());
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      edges.push_back({static_cast<Node>(i), static_cast<Node>(j), cost(i, j)});
  return Instance(n_, std::move(edges));
}

void CompleteInstance::pop_node() {
  if (n_ == 0) throw InputError("pop_node on empty instance");
  --n_;
  lower_.resize(mc::pair_count(n_));
}

bool is_multicut(const Instance& inst, const EdgeLabeling& x) {
  require_size(x.size(), inst.edge_count());
  UnionFind uf(inst.node_count());
  const auto edges = inst.edges();
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (x[e] == 0) uf.merge(edges[e].i, edges[e].j);
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (x[e] != 0 && uf.same(edges[e].i, edges[e].j)) return false;
  return true;
}

bool is_multicut(const CompleteInstance& ci, const EdgeLabeling& x) {
  const std::size_t n = ci.node_count();
  require_size(x.size(), ci.pair_count());
  UnionFind uf(n);
  for (std::size_t i = 0, e = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++e)
      if (x[e] == 0) uf.merge(i, j);
  for (std::size_t i = 0, e = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++e)
      if (x[e] != 0 && uf.same(i, j)) return false;
  return true;
}

bool check_cycle_inequalities(const Instance& inst, const EdgeLabeling& x) {
  const std::size_t n = inst.node_count();
  if (n > 12) throw SizeGuardError("cycle enumeration limited to n <= 12");
  require_size(x.size(), inst.edge_count());

  // edge index per pair, -1 when absent
  std::vector<int> index(n * n, -1);
  for (std::size_t e = 0; e < inst.edge_count(); ++e) {
    const auto& ed = inst.edge(e);
    index[ed.i * n + ed.j] = index[ed.j * n + ed.i] = static_cast<int>(e);
  }
  auto adjacent = [&](std::size_t a, std::size_t b) { return index[a * n + b] >= 0; };

  // A cycle violates the inequalities iff exactly one of its edges is cut.
  auto violated = [&](const std::vector<std::size_t>& cycle) {
    int cuts = 0;
    for (std::size_t k = 0; k < cycle.size(); ++k)
      cuts += x[static_cast<std::size_t>(index[cycle[k] * n + cycle[(k + 1) % cycle.size()]])];
    return cuts == 1;
  };

  // Grow induced paths from the smallest cycle vertex; a neighbour of the
  // start closes a chordless cycle and cannot extend the path further.
  std::vector<std::size_t> path;
  std::vector<char> on_path(n, 0);
  bool ok = true;
  std::function<void()> extend = [&]() {
    const std::size_t start = path.front();
    const std::size_t last = path.back();
    for (std::size_t w = start + 1; w < n && ok; ++w) {
      if (on_path[w] || !adjacent(last, w)) continue;
      bool chord = false;
      for (std::size_t k = 1; k + 1 < path.size(); ++k)
        if (adjacent(path[k], w)) {
          chord = true;
          break;
        }
      if (chord) continue;
      if (path.size() >= 2 && adjacent(start, w)) {
        if (path[1] < w) {
          path.push_back(w);
          if (violated(path)) ok = false;
          path.pop_back();
        }
        continue;
      }
      path.push_back(w);
      on_path[w] = 1;
      extend();
      on_path[w] = 0;
      path.pop_back();
    }
  };
  for (std::size_t s = 0; s < n && ok; ++s) {
    path.assign(1, s);
    on_path[s] = 1;
    extend();
    on_path[s] = 0;
  }
  return ok;
}

EdgeLabeling partition_to_multicut(const Instance& inst, const Partition& p) {
  const std::size_t n = inst.node_count();
  if (p.node_count() != n)
    throw InputError("partition covers " + std::to_string(p.node_count()) + " nodes, instance has " +
                     std::to_string(n));
  UnionFind uf(n);
  for (const auto& e : inst.edges())
    if (p[e.i] == p[e.j]) uf.merge(e.i, e.j);
  std::vector<std::size_t> root_of_cluster(p.cluster_count(), n);
  for (std::size_t v = 0; v < n; ++v) {
    auto& r = root_of_cluster[p[v]];
    const std::size_t root = uf.find(v);
    if (r == n)
      r = root;
    else if (r != root)
      throw InfeasibleError("cluster " + std::to_string(p[v]) + " is not connected in the graph");
  }
  EdgeLabeling x(inst.edge_count());
  for (std::size_t e = 0; e < inst.edge_count(); ++e) x[e] = p[inst.edge(e).i] != p[inst.edge(e).j];
  return x;
}

EdgeLabeling partition_to_multicut(const CompleteInstance& ci, const Partition& p) {
  const std::size_t n = ci.node_count();
  if (p.node_count() != n)
    throw InputError("partition covers " + std::to_string(p.node_count()) + " nodes, instance has " +
                     std::to_string(n));
  EdgeLabeling x(ci.pair_count());
  for (std::size_t i = 0, e = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++e) x[e] = p[i] != p[j];
  return x;
}

Partition multicut_to_partition(const Instance& inst, const EdgeLabeling& x) {
  if (!is_multicut(inst, x)) throw InfeasibleError("labeling is not a multicut");
  return components_of_joined(inst.node_count(), inst.edges(), x);
}

Partition multicut_to_partition(const CompleteInstance& ci, const EdgeLabeling& x) {
  if (!is_multicut(ci, x)) throw InfeasibleError("labeling is not a multicut");
  const std::size_t n = ci.node_count();
  UnionFind uf(n);
  for (std::size_t i = 0, e = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++e)
      if (x[e] == 0) uf.merge(i, j);
  std::vector<std::uint32_t> roots(n);
  for (std::size_t v = 0; v < n; ++v) roots[v] = static_cast<std::uint32_t>(uf.find(v));
  return Partition(std::move(roots));
}

CompleteInstance complete(const Instance& inst) {
  CompleteInstance ci(inst.node_count());
  for (const auto& e : inst.edges()) ci.set_cost(e.i, e.j, e.cost);
  return ci;
}

CompleteInstance normalize(const CompleteInstance& ci) {
  CompleteInstance out = ci;
  out.set_normalized(true);
  const double total = ci.abs_cost_sum();
  if (total == 0.0) return out;
  const double scale = static_cast<double>(ci.pair_count()) / total;
  const std::size_t n = ci.node_count();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) out.set_cost(i, j, ci.cost(i, j) * scale);
  return out;
}

Contraction contract(const CompleteInstance& ci, Node i, Node j) {
  const std::size_t n = ci.node_count();
  if (i == j) throw InputError("cannot contract a node with itself");
  if (i >= n || j >= n) throw InputError("contraction endpoint out of range");

  Contraction out{ci, {}};
  CompleteInstance& c = out.instance;
  for (std::size_t k = 0; k < n; ++k)
    if (k != i && k != j) c.set_cost(i, k, ci.cost(i, k) + ci.cost(j, k));

  // Swap-remove: the last node takes the removed node's slot.
  const std::size_t last = n - 1;
  if (j != last) {
    for (std::size_t k = 0; k < last; ++k)
      if (k != j) c.set_cost(j, k, c.cost(last, k));
  }
  c.pop_node();
  c.set_normalized(false);

  auto& rec = out.record;
  rec.kept = i;
  rec.removed = j;
  rec.old_to_new.resize(n);
  for (std::size_t v = 0; v < n; ++v) rec.old_to_new[v] = static_cast<Node>(v);
  if (j != last) rec.old_to_new[last] = j;
  rec.old_to_new[j] = rec.old_to_new[i];
  return out;
}

EdgeLabeling lift(const ContractionRecord& record, const EdgeLabeling& contracted) {
  const std::size_t n = record.old_to_new.size();
  if (n == 0) return EdgeLabeling{};
  if (contracted.size() != mc::pair_count(n - 1))
    throw InputError("contracted labeling does not match the contraction record");
  EdgeLabeling x(mc::pair_count(n));
  for (std::size_t a = 0, e = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b, ++e) {
      const Node na = record.old_to_new[a];
      const Node nb = record.old_to_new[b];
      x[e] = na == nb ? 0 : contracted[pair_index(n - 1, na, nb)];
    }
  return x;
}

EdgeLabeling restrict_to(const Instance& inst, const EdgeLabeling& complete_labeling) {
  const std::size_t n = inst.node_count();
  require_size(complete_labeling.size(), mc::pair_count(n));
  EdgeLabeling x(inst.edge_count());
  for (std::size_t e = 0; e < inst.edge_count(); ++e)
    x[e] = complete_labeling[pair_index(n, inst.edge(e).i, inst.edge(e).j)];
  return x;
}

double objective(const Instance& inst, const EdgeLabeling& x) {
  require_size(x.size(), inst.edge_count());
  double v = 0.0;
  for (std::size_t e = 0; e < inst.edge_count(); ++e)
    if (x[e]) v += inst.edge(e).cost;
  return v;
}

double objective(const CompleteInstance& ci, const EdgeLabeling& x) {
  require_size(x.size(), ci.pair_count());
  const std::size_t n = ci.node_count();
  double v = 0.0;
  for (std::size_t i = 0, e = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++e)
      if (x[e]) v += ci.cost(i, j);
  return v;
}

} // namespace mc
