#include "multicut/exact.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "multicut/error.hpp"
#include "multicut/heuristics.hpp"
#include "multicut/union_find.hpp"

namespace mc {

ExactResult brute_force(const Instance& inst) {
  const std::size_t n = inst.node_count();
  if (n > kBruteForceMaxNodes)
    throw SizeGuardError("brute force limited to n <= " + std::to_string(kBruteForceMaxNodes) + ", got " +
                         std::to_string(n));

  std::vector<double> w(n * n, 0.0);
  for (const auto& e : inst.edges()) w[e.i * n + e.j] = w[e.j * n + e.i] = e.cost;

  // Restricted-growth strings: node v joins one of the clusters used by
  // 0..v-1 or opens a new one. Placing v in cluster c cuts every earlier node
  // outside c.
  std::vector<std::uint32_t> assign(n, 0), best(n, 0);
  double best_value = std::numeric_limits<double>::infinity();
  std::uint64_t leaves = 0;

  auto recurse = [&](auto&& self, std::size_t v, std::uint32_t used, double value) -> void {
    if (v == n) {
      ++leaves;
      if (value < best_value) {
        best_value = value;
        best = assign;
      }
      return;
    }
    for (std::uint32_t c = 0; c <= used && c < n; ++c) {
      double added = 0.0;
      for (std::size_t u = 0; u < v; ++u)
        if (assign[u] != c) added += w[u * n + v];
      assign[v] = c;
      self(self, v + 1, std::max(used, c + 1), value + added);
    }
  };
  if (n == 0) {
    leaves = 1;
    best_value = 0.0;
  } else {
    recurse(recurse, 0, 0, 0.0);
  }

  // Split clusters that are disconnected in the input graph; no edge runs
  // between the pieces, so the cost does not change.
  UnionFind uf(n);
  for (const auto& e : inst.edges())
    if (best[e.i] == best[e.j]) uf.merge(e.i, e.j);
  std::vector<std::uint32_t> roots(n);
  for (std::size_t v = 0; v < n; ++v) roots[v] = static_cast<std::uint32_t>(uf.find(v));

  ExactResult r;
  r.labeling = partition_to_multicut(inst, Partition(std::move(roots)));
  r.value = objective(inst, r.labeling);
  r.proven_optimal = true;
  r.nodes_explored = leaves;
  return r;
}

namespace {

class BranchAndBound {
public:
  BranchAndBound(const CompleteInstance& ci, double time_limit)
      : n_(ci.node_count()), cost_(ci.costs()), state_(cost_.size(), kFree), index_(n_ * n_, 0),
        time_limit_(time_limit), start_(std::chrono::steady_clock::now()) {
    for (std::size_t i = 0, e = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j, ++e) {
        index_[i * n_ + j] = index_[j * n_ + i] = e;
        ends_.emplace_back(static_cast<Node>(i), static_cast<Node>(j));
      }
    order_.resize(cost_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(cost_[a]) > std::abs(cost_[b]); });
    for (double c : cost_) negative_free_ += std::min(0.0, c);

    const auto seed = gaec(ci);
    incumbent_ = seed.value;
    best_.assign(seed.labeling.begin(), seed.labeling.end());
  }

  ExactResult run() {
    timed_out_ = false;
    search(0);
    ExactResult r;
    r.labeling = EdgeLabeling(best_);
    r.value = 0.0;
    for (std::size_t e = 0; e < best_.size(); ++e)
      if (best_[e]) r.value += cost_[e];
    r.proven_optimal = !timed_out_;
    r.nodes_explored = explored_;
    return r;
  }

private:
  static constexpr std::int8_t kFree = -1;

  // Fixes pair e and everything the triangle rules imply. Returns false on a
  // conflict; assignments made so far stay on the trail for undo.
  bool fix(std::size_t e, std::int8_t value) {
    std::vector<std::pair<std::size_t, std::int8_t>> queue{{e, value}};
    while (!queue.empty()) {
      const auto [p, v] = queue.back();
      queue.pop_back();
      if (state_[p] != kFree) {
        if (state_[p] != v) return false;
        continue;
      }
      assign(p, v);
      const auto [i, j] = ends_[p];
      for (std::size_t k = 0; k < n_; ++k) {
        if (k == i || k == j) continue;
        const std::size_t a = index_[i * n_ + k];
        const std::size_t b = index_[j * n_ + k];
        const std::int8_t sa = state_[a];
        const std::int8_t sb = state_[b];
        if (v == 0) {
          // ij joined: ik and jk must agree.
          if (sa != kFree && sb == kFree) queue.emplace_back(b, sa);
          else if (sb != kFree && sa == kFree) queue.emplace_back(a, sb);
          else if (sa != kFree && sb != kFree && sa != sb) return false;
        } else {
          // ij cut: ik and jk cannot both be joined.
          if (sa == 0 && sb == kFree) queue.emplace_back(b, std::int8_t{1});
          else if (sb == 0 && sa == kFree) queue.emplace_back(a, std::int8_t{1});
          else if (sa == 0 && sb == 0) return false;
        }
      }
    }
    return true;
  }

  void assign(std::size_t p, std::int8_t v) {
    state_[p] = v;
    trail_.push_back(p);
    negative_free_ -= std::min(0.0, cost_[p]);
    if (v == 1) fixed_cost_ += cost_[p];
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      const std::size_t p = trail_.back();
      trail_.pop_back();
      if (state_[p] == 1) fixed_cost_ -= cost_[p];
      negative_free_ += std::min(0.0, cost_[p]);
      state_[p] = kFree;
    }
  }

  bool out_of_time() {
    if (timed_out_) return true;
    if (!std::isfinite(time_limit_) || (explored_ & 1023) != 0) return false;
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    timed_out_ = elapsed >= time_limit_;
    return timed_out_;
  }

  void search(std::size_t pos) {
    ++explored_;
    if (out_of_time()) return;
    if (fixed_cost_ + negative_free_ >= incumbent_) return;
    while (pos < order_.size() && state_[order_[pos]] != kFree) ++pos;
    if (pos == order_.size()) {
      incumbent_ = fixed_cost_;
      best_.assign(state_.begin(), state_.end());
      return;
    }
    const std::size_t e = order_[pos];
    const std::int8_t first = cost_[e] > 0.0 ? 0 : 1;
    for (std::int8_t v : {first, static_cast<std::int8_t>(1 - first)}) {
      const std::size_t mark = trail_.size();
      if (fix(e, v)) search(pos + 1);
      undo(mark);
      if (timed_out_) return;
    }
  }

  std::size_t n_;
  std::vector<double> cost_;
  std::vector<std::int8_t> state_;
  std::vector<std::size_t> index_;
  std::vector<std::pair<Node, Node>> ends_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> trail_;
  std::vector<std::uint8_t> best_;
  double fixed_cost_ = 0.0;
  double negative_free_ = 0.0;
  double incumbent_ = 0.0;
  std::uint64_t explored_ = 0;
  double time_limit_;
  std::chrono::steady_clock::time_point start_;
  bool timed_out_ = false;
};

} // namespace

ExactResult branch_and_bound(const CompleteInstance& ci, double time_limit_seconds) {
  return BranchAndBound(ci, time_limit_seconds).run();
}

} // namespace mc
