#include <random>

#include "doctest.h"
#include "multicut/error.hpp"
#include "multicut/exact.hpp"
#include "support.hpp"

using namespace mc;
using namespace mc::testing;

TEST_CASE("brute force on the fig2 instance") {
  const auto inst = golden_instance();
  const auto r = brute_force(inst);
  CHECK(r.value == -6.0);
  CHECK(r.proven_optimal);
  CHECK(r.labeling == golden_labeling(inst));
}

TEST_CASE("brute force trivial cases") {
  const Instance pos(4, {{0, 1, 1}, {1, 2, 2}, {2, 3, 3}, {0, 3, 0.5}});
  const auto a = brute_force(pos);
  CHECK(a.value == 0.0);
  CHECK(a.labeling == EdgeLabeling(4, 0));

  const Instance neg(3, {{0, 1, -1}, {0, 2, -1}, {1, 2, -1}});
  const auto b = brute_force(neg);
  CHECK(b.value == -3.0);
  CHECK(b.labeling == EdgeLabeling(3, 1));

  CHECK_THROWS_AS(brute_force(Instance(13, {})), SizeGuardError);
  CHECK(brute_force(Instance(1, {})).value == 0.0);
}

TEST_CASE("brute force matches the partition oracle on sparse graphs") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 80; ++rep) {
    const auto inst = random_sparse(rng, 2 + rng() % 7, 0.5);
    const auto r = brute_force(inst);
    REQUIRE(is_multicut(inst, r.labeling));
    REQUIRE(r.value == oracle_optimum(inst));
    REQUIRE(r.value == objective(inst, r.labeling));
  }
}

TEST_CASE("branch and bound examples") {
  const auto r = branch_and_bound(complete(golden_instance()));
  CHECK(r.value == -6.0);
  CHECK(r.proven_optimal);

  std::vector<double> neg(pair_count(6));
  for (std::size_t p = 0; p < neg.size(); ++p) neg[p] = -1.0 - static_cast<double>(p % 3);
  const CompleteInstance ci(6, neg);
  const auto s = branch_and_bound(ci);
  CHECK(s.labeling == EdgeLabeling(neg.size(), 1));
  double sum = 0;
  for (double c : neg) sum += c;
  CHECK(s.value == sum);
}

TEST_CASE("branch and bound agrees with brute force") {
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 5 + rep % 6;
    const auto inst = random_complete(rng, n);
    const auto ci = complete(inst);
    const auto bb = branch_and_bound(ci);
    REQUIRE(bb.proven_optimal);
    REQUIRE(is_multicut(ci, bb.labeling));
    REQUIRE(bb.value == objective(ci, bb.labeling));
    REQUIRE(bb.value == brute_force(inst).value);
  }
}

TEST_CASE("branch and bound honours a time limit") {
  std::mt19937_64 rng(47);
  const auto ci = complete(random_complete(rng, 40));
  const auto r = branch_and_bound(ci, 0.05);
  CHECK(is_multicut(ci, r.labeling));
  CHECK(r.value == objective(ci, r.labeling));
  if (!r.proven_optimal) CHECK(r.nodes_explored > 0);
}
