#include "multicut/solve.hpp"

#include <algorithm>
#include <chrono>

#include "multicut/error.hpp"
#include "multicut/exact.hpp"
#include "multicut/heuristics.hpp"

namespace mc {

const std::vector<std::string>& solver_names() {
  static const std::vector<std::string> names{"gaec", "gf", "mws", "klj", "bruteforce", "bnb", "gnn", "gnn1"};
  return names;
}

bool is_solver(const std::string& name) {
  const auto& n = solver_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

SolveOutcome solve(const std::string& solver, const Instance& inst, const SolveOptions& opt) {
  if (!is_solver(solver)) throw InputError("unknown solver '" + solver + "'");
  const auto t0 = std::chrono::steady_clock::now();
  SolveOutcome out;

  if (solver == "bruteforce") {
    auto r = brute_force(inst);
    out.labeling = std::move(r.labeling);
    out.proven_optimal = true;
  } else if (solver == "gnn" || solver == "gnn1") {
    if (!opt.model) throw InputError("solver '" + solver + "' needs a model");
    auto [r, trace] = solver == "gnn" ? solve_autoregressive(*opt.model, inst, opt.inference)
                                      : solve_single_pass(*opt.model, inst);
    out.labeling = std::move(r.labeling);
    if (opt.trace) *opt.trace = std::move(trace);
  } else {
    const CompleteInstance ci = complete(inst);
    EdgeLabeling full;
    if (solver == "bnb") {
      auto r = branch_and_bound(ci, opt.time_limit);
      full = std::move(r.labeling);
      out.proven_optimal = r.proven_optimal;
      out.timed_out = !r.proven_optimal;
    } else if (solver == "gaec") {
      full = gaec(ci).labeling;
    } else if (solver == "gf") {
      full = greedy_fixation(ci).labeling;
    } else if (solver == "mws") {
      full = mutex_watershed(ci).labeling;
    } else {
      full = kernighan_lin_joins(ci).labeling;
    }
    out.labeling = restrict_to(inst, full);
  }

  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.value = objective(inst, out.labeling);
  return out;
}

} // namespace mc
