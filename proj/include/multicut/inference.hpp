#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "multicut/core.hpp"
#include "multicut/heuristics.hpp"
#include "multicut/tmp.hpp"

namespace mc {

struct InferenceOptions {
  // Normalize the contracted instance before every model pass (the model is
  // trained on normalized inputs only). Off: only the first pass sees a
  // freshly normalized instance.
  bool renormalize_each_pass = true;
  std::size_t contractions_per_pass = 1;
};

struct TraceStep {
  Node a; // cluster labels (smallest original member), a < b
  Node b;
  double logit;
  std::size_t pass;
  double objective; // objective on the input instance after this contraction
};

struct SolveTrace {
  std::vector<TraceStep> steps;
  std::size_t passes = 0; // model evaluations
  EdgeLabeling labeling;
  double objective = 0.0;
};

// Returns logits equal to the costs of the instance it is given; stands in
// for a model when checking the solvers against GAEC.
class IdentityLogits : public LogitModel {
public:
  std::vector<double> logits(const CompleteInstance& ci) const override { return ci.costs(); }
};

// Complete, normalize, score, contract the highest positive logit (ties to
// the smallest pair of cluster labels), repeat until no logit is positive.
// The result labeling is over inst.edges().
std::pair<HeuristicResult, SolveTrace> solve_autoregressive(const LogitModel& model, const Instance& inst,
                                                            const InferenceOptions& opt = {});

// One model pass, then additive contraction on the logits.
std::pair<HeuristicResult, SolveTrace> solve_single_pass(const LogitModel& model, const Instance& inst);

// One JSON object per contraction: pass, edge [a,b], logit, objective.
void write_trace_jsonl(std::ostream& os, const SolveTrace& trace);

} // namespace mc
