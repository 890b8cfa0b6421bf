#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "multicut/exact.hpp"
#include "multicut/heuristics.hpp"
#include "multicut/inference.hpp"
#include "support.hpp"

using namespace mc;
using namespace mc::testing;

namespace {

// Logits with the signs of the costs and no other information.
class SignLogits : public LogitModel {
public:
  std::vector<double> logits(const CompleteInstance& ci) const override {
    auto z = ci.costs();
    for (auto& v : z) v = v > 0 ? 1.0 : -1.0;
    return z;
  }
};

class CountingIdentity : public LogitModel {
public:
  std::vector<double> logits(const CompleteInstance& ci) const override {
    ++calls;
    REQUIRE(ci.normalized());
    return ci.costs();
  }
  mutable std::size_t calls = 0;
};

} // namespace

TEST_CASE("identity logits reproduce gaec") {
  std::mt19937_64 rng(3);
  const IdentityLogits id;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rng() % 14;
    const auto inst = rep % 3 ? random_complete(rng, n) : random_continuous(rng, n);
    const auto ref = gaec(normalize(complete(inst))).labeling;
    REQUIRE(solve_single_pass(id, inst).first.labeling == ref);
    // Rescaling between passes can reorder sums that tie exactly on integer
    // costs, so tie-heavy instances run without it.
    InferenceOptions opt;
    opt.renormalize_each_pass = rep % 3 == 0;
    REQUIRE(solve_autoregressive(id, inst, opt).first.labeling == ref);
  }
}

TEST_CASE("negative costs give singletons in one pass") {
  std::vector<Edge> edges;
  for (Node i = 0; i < 5; ++i)
    for (Node j = i + 1; j < 5; ++j) edges.push_back({i, j, -1.0 - i});
  const Instance inst(5, edges);
  const SignLogits model;
  const auto [r, trace] = solve_autoregressive(model, inst);
  CHECK(trace.passes == 1);
  CHECK(trace.steps.empty());
  CHECK(r.labeling == EdgeLabeling(10, 1));
}

TEST_CASE("autoregressive loop bounds and feasibility") {
  std::mt19937_64 rng(5);
  CountingIdentity model;
  for (int rep = 0; rep < 100; ++rep) {
    const auto inst = random_sparse(rng, 2 + rng() % 10, 0.6);
    model.calls = 0;
    const auto [r, trace] = solve_autoregressive(model, inst);
    REQUIRE(is_multicut(inst, r.labeling));
    REQUIRE(trace.steps.size() <= inst.node_count() - 1);
    REQUIRE(trace.passes == model.calls);
    REQUIRE(trace.passes <= inst.node_count());
    REQUIRE(r.value == objective(inst, r.labeling));
    if (!trace.steps.empty()) REQUIRE(trace.steps.back().objective == r.value);
  }
}

TEST_CASE("fig2 instance through the sign model") {
  const auto inst = golden_instance();
  const SignLogits model;
  const auto [r, trace] = solve_autoregressive(model, inst);
  CHECK(is_multicut(inst, r.labeling));
  CHECK(r.value >= brute_force(inst).value);
}

TEST_CASE("contractions per pass") {
  std::mt19937_64 rng(7);
  const IdentityLogits id;
  InferenceOptions opt;
  opt.contractions_per_pass = 3;
  for (int rep = 0; rep < 50; ++rep) {
    const auto inst = random_complete(rng, 4 + rng() % 8);
    const auto [r, trace] = solve_autoregressive(id, inst, opt);
    REQUIRE(is_multicut(inst, r.labeling));
    for (const auto& s : trace.steps) REQUIRE(s.a < s.b);
  }
  InferenceOptions keep;
  keep.renormalize_each_pass = false;
  const auto inst = random_complete(rng, 8);
  CHECK(is_multicut(inst, solve_autoregressive(id, inst, keep).first.labeling));
}

TEST_CASE("solvers are deterministic") {
  std::mt19937_64 rng(9);
  const TmpModel model(ModelConfig::small(), 4);
  const auto inst = random_complete(rng, 9);
  const auto a = solve_autoregressive(model, inst);
  const auto b = solve_autoregressive(model, inst);
  CHECK(a.first.labeling == b.first.labeling);
  REQUIRE(a.second.steps.size() == b.second.steps.size());
  for (std::size_t k = 0; k < a.second.steps.size(); ++k) {
    CHECK(a.second.steps[k].logit == b.second.steps[k].logit);
    CHECK(a.second.steps[k].a == b.second.steps[k].a);
  }
  CHECK(is_multicut(inst, solve_single_pass(model, inst).first.labeling));
}

TEST_CASE("single pass is feasible") {
  std::mt19937_64 rng(11);
  const TmpModel model(ModelConfig::small(), 5);
  for (int rep = 0; rep < 100; ++rep) {
    const auto inst = random_sparse(rng, 2 + rng() % 12, 0.7);
    const auto [r, trace] = solve_single_pass(model, inst);
    REQUIRE(is_multicut(inst, r.labeling));
    REQUIRE(trace.passes <= 1);
  }
}

TEST_CASE("trace as json lines") {
  const IdentityLogits id;
  const Instance k3(3, {{0, 1, 5}, {0, 2, -2}, {1, 2, 3}});
  const auto [r, trace] = solve_autoregressive(id, k3);
  std::ostringstream os;
  write_trace_jsonl(os, trace);
  std::istringstream is(os.str());
  std::string line;
  std::vector<nlohmann::json> rows;
  while (std::getline(is, line)) rows.push_back(nlohmann::json::parse(line));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0]["edge"] == nlohmann::json::array({0, 1}));
  CHECK(rows[0]["pass"] == 0);
  CHECK(rows[1]["pass"] == 1);
  CHECK(rows[1]["objective"] == 0.0);
  CHECK(r.value == 0.0);
}
