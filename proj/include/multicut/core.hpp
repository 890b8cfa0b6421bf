#pragma once

// Multicut instances, labelings and the transformations between them:
// feasibility, clustering <-> multicut conversion, completion to K_n,
// cost normalization and edge contraction.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace mc {

using Node = std::uint32_t;

struct Edge {
  Node i;
  Node j;
  double cost;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Number of unordered pairs of n nodes.
constexpr std::size_t pair_count(std::size_t n) noexcept { return n < 2 ? 0 : n * (n - 1) / 2; }

// Index of {i,j} in the lexicographic order (0,1),(0,2),...,(0,n-1),(1,2),...
// Every labeling, logit vector and feature field over K_n uses this order.
constexpr std::size_t pair_index(std::size_t n, std::size_t i, std::size_t j) noexcept {
  if (i > j) std::swap(i, j);
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

// Weighted graph on nodes 0..n-1. Edges are stored as (i<j) in lexicographic
// order without duplicates; labelings of an Instance follow that order.
class Instance {
public:
  Instance() = default;
  // Validates and sorts; throws InputError on self loops, out-of-range
  // endpoints, duplicate pairs or non-finite costs.
  Instance(std::size_t n, std::vector<Edge> edges);

  std::size_t node_count() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }
  std::optional<std::size_t> find_edge(Node i, Node j) const;
  bool is_complete() const noexcept { return edges_.size() == pair_count(n_); }

  friend bool operator==(const Instance&, const Instance&) = default;

private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
};

// 0/1 per edge, 1 = cut.
class EdgeLabeling {
public:
  EdgeLabeling() = default;
  explicit EdgeLabeling(std::size_t m, std::uint8_t value = 0) : values_(m, value) {}
  explicit EdgeLabeling(std::vector<std::uint8_t> values) : values_(std::move(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  std::uint8_t operator[](std::size_t e) const { return values_[e]; }
  std::uint8_t& operator[](std::size_t e) { return values_[e]; }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }
  std::span<const std::uint8_t> values() const noexcept { return values_; }
  std::size_t cut_count() const noexcept;

  friend bool operator==(const EdgeLabeling&, const EdgeLabeling&) = default;

private:
  std::vector<std::uint8_t> values_;
};

// Cluster id per node, renumbered on construction so that ids are contiguous
// from 0 in order of first appearance.
class Partition {
public:
  Partition() = default;
  explicit Partition(std::vector<std::uint32_t> labels);

  std::size_t node_count() const noexcept { return ids_.size(); }
  std::size_t cluster_count() const noexcept { return clusters_; }
  std::uint32_t operator[](std::size_t v) const { return ids_[v]; }
  std::span<const std::uint32_t> ids() const noexcept { return ids_; }
  std::vector<std::vector<Node>> clusters() const;

  friend bool operator==(const Partition&, const Partition&) = default;

private:
  std::vector<std::uint32_t> ids_;
  std::size_t clusters_ = 0;
};

// Costs on the complete graph K_n, packed as a lower triangle (row i holds
// the pairs (i,0)..(i,i-1)) so that dropping the last node is a truncation.
class CompleteInstance {
public:
  CompleteInstance() = default;
  explicit CompleteInstance(std::size_t n) : n_(n), lower_(mc::pair_count(n), 0.0) {}
  // costs in lexicographic pair order.
  CompleteInstance(std::size_t n, std::span<const double> costs, bool normalized = false);

  std::size_t node_count() const noexcept { return n_; }
  std::size_t pair_count() const noexcept { return lower_.size(); }
  bool normalized() const noexcept { return normalized_; }

  double cost(std::size_t i, std::size_t j) const { return lower_[slot(i, j)]; }
  void set_cost(std::size_t i, std::size_t j, double c) { lower_[slot(i, j)] = c; }

  // Costs in lexicographic pair order.
  std::vector<double> costs() const;
  double abs_cost_sum() const noexcept;
  Instance to_instance() const;

  friend bool operator==(const CompleteInstance&, const CompleteInstance&) = default;

  // Drop the last node (truncates the packed storage).
  void pop_node();
  void set_normalized(bool flag) noexcept { normalized_ = flag; }

private:
  std::size_t slot(std::size_t i, std::size_t j) const {
    if (i < j) std::swap(i, j);
    return i * (i - 1) / 2 + j;
  }

  std::size_t n_ = 0;
  std::vector<double> lower_;
  bool normalized_ = false;
};

// Bookkeeping of one contraction of pair {kept, removed}. The removed node's
// slot is refilled by the former last node.
struct ContractionRecord {
  Node kept = 0;
  Node removed = 0;
  // Old node index -> node index after contraction; removed maps onto kept.
  std::vector<Node> old_to_new;
};

struct Contraction {
  CompleteInstance instance;
  ContractionRecord record;
};

bool is_multicut(const Instance& inst, const EdgeLabeling& x);
bool is_multicut(const CompleteInstance& ci, const EdgeLabeling& x);

// Explicit enumeration of chordless cycles; test oracle, n <= 12.
bool check_cycle_inequalities(const Instance& inst, const EdgeLabeling& x);

EdgeLabeling partition_to_multicut(const Instance& inst, const Partition& p);
EdgeLabeling partition_to_multicut(const CompleteInstance& ci, const Partition& p);
Partition multicut_to_partition(const Instance& inst, const EdgeLabeling& x);
Partition multicut_to_partition(const CompleteInstance& ci, const EdgeLabeling& x);

CompleteInstance complete(const Instance& inst);
CompleteInstance normalize(const CompleteInstance& ci);
Contraction contract(const CompleteInstance& ci, Node i, Node j);

// Labeling of the pre-contraction K_n induced by a labeling of the contracted
// instance; the contracted pair (and any pair mapped onto one node) is joined.
EdgeLabeling lift(const ContractionRecord& record, const EdgeLabeling& contracted);

// Restriction of a labeling of complete(inst) to the edges of inst.
EdgeLabeling restrict_to(const Instance& inst, const EdgeLabeling& complete_labeling);

double objective(const Instance& inst, const EdgeLabeling& x);
double objective(const CompleteInstance& ci, const EdgeLabeling& x);

} // namespace mc
