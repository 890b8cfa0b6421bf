#pragma once

#include <limits>
#include <string>
#include <vector>

#include "multicut/core.hpp"
#include "multicut/inference.hpp"
#include "multicut/tmp.hpp"

namespace mc {

struct SolveOptions {
  double time_limit = std::numeric_limits<double>::infinity(); // bnb only
  const LogitModel* model = nullptr;                             // gnn, gnn1
  InferenceOptions inference;
  SolveTrace* trace = nullptr; // filled by gnn and gnn1
};

struct SolveOutcome {
  EdgeLabeling labeling; // over inst.edges()
  double value = 0.0;
  double wall_time = 0.0; // solve call only, seconds
  bool proven_optimal = false;
  bool timed_out = false;
};

// gaec, gf, mws, klj, bruteforce, bnb, gnn, gnn1
const std::vector<std::string>& solver_names();
bool is_solver(const std::string& name);

// Sparse inputs are completed (zero-cost pairs), solved and restricted back.
// Throws InputError for unknown solvers or a missing model.
SolveOutcome solve(const std::string& solver, const Instance& inst, const SolveOptions& opt = {});

} // namespace mc
