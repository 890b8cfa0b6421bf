#include "multicut/inference.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>
#include <string>

#include "json.hpp"
#include "multicut/union_find.hpp"

namespace mc {

namespace {

using Clock = std::chrono::steady_clock;

EdgeLabeling labeling_from_nodes(const Instance& inst, const std::vector<Node>& node_of) {
  EdgeLabeling x(inst.edge_count());
  for (std::size_t e = 0; e < inst.edge_count(); ++e) x[e] = node_of[inst.edge(e).i] != node_of[inst.edge(e).j];
  return x;
}

struct Candidate {
  double logit;
  Node la;
  Node lb;
  Node u;
  Node v;
};

} // namespace

std::pair<HeuristicResult, SolveTrace> solve_autoregressive(const LogitModel& model, const Instance& inst,
                                                            const InferenceOptions& opt) {
  const auto t0 = Clock::now();
  const std::size_t n0 = inst.node_count();
  SolveTrace trace;

  CompleteInstance current = normalize(complete(inst));
  std::vector<Node> node_of(n0);   // original node -> current node
  std::vector<Node> label(n0);     // current node -> smallest original member
  for (std::size_t v = 0; v < n0; ++v) node_of[v] = label[v] = static_cast<Node>(v);
  const std::size_t per_pass = std::max<std::size_t>(opt.contractions_per_pass, 1);

  while (current.node_count() >= 2) {
    const auto z = model.logits(current);
    ++trace.passes;
    const std::size_t n = current.node_count();

    std::vector<Candidate> cands;
    for (std::size_t i = 0, p = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j, ++p)
        if (z[p] > 0.0)
          cands.push_back({z[p], std::min(label[i], label[j]), std::max(label[i], label[j]), static_cast<Node>(i),
                           static_cast<Node>(j)});
    if (cands.empty()) break;
    std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
      if (x.logit != y.logit) return x.logit > y.logit;
      return std::tie(x.la, x.lb) < std::tie(y.la, y.lb);
    });

    // Original representatives keep each chosen pair identifiable while
    // earlier contractions of the same pass renumber the nodes.
    std::size_t done = 0;
    for (const auto& c : cands) {
      if (done == per_pass) break;
      const Node u = node_of[c.la];
      const Node v = node_of[c.lb];
      if (u == v) continue;
      const Node keep = label[u] < label[v] ? u : v;
      const Node drop = keep == u ? v : u;
      auto [next, rec] = contract(current, keep, drop);
      std::vector<Node> next_label(next.node_count(), 0);
      for (std::size_t old = 0; old < label.size(); ++old) {
        const Node nn = rec.old_to_new[old];
        next_label[nn] = old == drop ? next_label[nn] : label[old];
      }
      next_label[rec.old_to_new[keep]] = std::min(label[keep], label[drop]);
      for (auto& o : node_of) o = rec.old_to_new[o];
      label = std::move(next_label);
      current = std::move(next);
      ++done;
      trace.steps.push_back({c.la, c.lb, c.logit, trace.passes - 1,
                             objective(inst, labeling_from_nodes(inst, node_of))});
    }
    if (opt.renormalize_each_pass)
      current = normalize(current);
    else
      current.set_normalized(true);
  }

  HeuristicResult r;
  r.labeling = labeling_from_nodes(inst, node_of);
  r.value = objective(inst, r.labeling);
  r.iterations = trace.steps.size();
  r.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  trace.labeling = r.labeling;
  trace.objective = r.value;
  return {std::move(r), std::move(trace)};
}

std::pair<HeuristicResult, SolveTrace> solve_single_pass(const LogitModel& model, const Instance& inst) {
  const auto t0 = Clock::now();
  const std::size_t n = inst.node_count();
  SolveTrace trace;
  const auto ci = normalize(complete(inst));
  std::vector<double> z = n >= 2 ? model.logits(ci) : std::vector<double>{};
  trace.passes = n >= 2 ? 1 : 0;

  std::vector<MergeStep> steps;
  const Partition p = additive_contraction(n, z, &steps);
  std::vector<Node> node_of(p.ids().begin(), p.ids().end());

  // Replay the merges for the per-step objective.
  UnionFind uf(n);
  std::vector<Node> running(n);
  for (const auto& s : steps) {
    uf.merge(s.a, s.b);
    for (std::size_t v = 0; v < n; ++v) running[v] = static_cast<Node>(uf.find(v));
    trace.steps.push_back({s.a, s.b, s.weight, 0, objective(inst, labeling_from_nodes(inst, running))});
  }

  HeuristicResult r;
  r.labeling = labeling_from_nodes(inst, node_of);
  r.value = objective(inst, r.labeling);
  r.iterations = steps.size();
  r.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  trace.labeling = r.labeling;
  trace.objective = r.value;
  return {std::move(r), std::move(trace)};
}

void write_trace_jsonl(std::ostream& os, const SolveTrace& trace) {
  for (const auto& s : trace.steps) {
    nlohmann::json j;
    j["pass"] = s.pass;
    j["edge"] = {s.a, s.b};
    j["logit"] = s.logit;
    j["objective"] = s.objective;
    os << j.dump() << '\n';
  }
}

} // namespace mc
