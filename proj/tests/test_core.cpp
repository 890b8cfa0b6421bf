#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "multicut/core.hpp"
#include "multicut/error.hpp"
#include "support.hpp"

using namespace mc;
using namespace mc::testing;

TEST_CASE("instance validation and canonical edge order") {
  const Instance inst(3, {{2, 1, 1.0}, {0, 2, -1.0}});
  REQUIRE(inst.edge_count() == 2);
  CHECK(inst.edge(0) == Edge{0, 2, -1.0});
  CHECK(inst.edge(1) == Edge{1, 2, 1.0});
  CHECK(inst.find_edge(2, 1) == std::optional<std::size_t>(1));
  CHECK_FALSE(inst.find_edge(0, 1).has_value());
  CHECK_THROWS_AS(Instance(2, {{0, 0, 1.0}}), InputError);
  CHECK_THROWS_AS(Instance(2, {{0, 2, 1.0}}), InputError);
  CHECK_THROWS_AS(Instance(3, {{0, 1, 1.0}, {1, 0, 2.0}}), InputError);
  CHECK_THROWS_AS(Instance(2, {{0, 1, std::nan("")}}), InputError);
}

TEST_CASE("pair index is lexicographic") {
  const std::size_t n = 6;
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++p) {
      CHECK(pair_index(n, i, j) == p);
      CHECK(pair_index(n, j, i) == p);
    }
  CHECK(p == pair_count(n));
}

TEST_CASE("fig2 labeling is a multicut with objective -6") {
  const auto inst = golden_instance();
  const auto x = golden_labeling(inst);
  CHECK(is_multicut(inst, x));
  CHECK(check_cycle_inequalities(inst, x));
  CHECK(objective(inst, x) == -6.0);
  CHECK(oracle_optimum(inst) == -6.0);
}

TEST_CASE("is_multicut small cases") {
  const Instance k3(3, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}});
  CHECK(is_multicut(k3, EdgeLabeling(3, 0)));
  CHECK(is_multicut(k3, EdgeLabeling(3, 1)));
  CHECK_FALSE(is_multicut(k3, EdgeLabeling(std::vector<std::uint8_t>{1, 0, 0})));
  CHECK_FALSE(check_cycle_inequalities(k3, EdgeLabeling(std::vector<std::uint8_t>{1, 0, 0})));
  CHECK(check_cycle_inequalities(k3, EdgeLabeling(3, 1)));

  const Instance c4(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {0, 3, 1}});
  EdgeLabeling one(4);
  one[0] = 1;
  CHECK_FALSE(check_cycle_inequalities(c4, one));
  CHECK_FALSE(is_multicut(c4, one));
  CHECK_THROWS_AS(is_multicut(c4, EdgeLabeling(3)), InputError);
  CHECK_THROWS_AS(check_cycle_inequalities(Instance(13, {}), EdgeLabeling()), SizeGuardError);
}

TEST_CASE("component test agrees with cycle enumeration") {
  std::mt19937_64 rng(11);
  // Exhaustive over all labelings of random graphs up to five nodes.
  for (std::size_t n = 2; n <= 5; ++n)
    for (int rep = 0; rep < 6; ++rep) {
      const auto inst = random_sparse(rng, n, rep == 0 ? 1.0 : 0.6);
      const std::size_t m = inst.edge_count();
      for (std::uint64_t mask = 0; mask < (1ULL << m); ++mask) {
        EdgeLabeling x(m);
        for (std::size_t e = 0; e < m; ++e) x[e] = (mask >> e) & 1;
        REQUIRE(is_multicut(inst, x) == check_cycle_inequalities(inst, x));
      }
    }
  for (int rep = 0; rep < 300; ++rep) {
    const auto inst = random_sparse(rng, 6 + rng() % 3, 0.5);
    const auto x = rep % 2 ? random_labeling(rng, inst.edge_count()) : random_feasible(rng, inst);
    REQUIRE(is_multicut(inst, x) == check_cycle_inequalities(inst, x));
  }
}

TEST_CASE("partition and multicut conversions") {
  const auto inst = golden_instance();
  const Partition p(std::vector<std::uint32_t>{2, 0, 0, 0, 1, 1, 1});
  CHECK(p.cluster_count() == 3);
  CHECK(p[0] == 0); // renumbered by first appearance
  CHECK(partition_to_multicut(inst, p) == golden_labeling(inst));

  const auto back = multicut_to_partition(inst, golden_labeling(inst));
  CHECK(back.cluster_count() == 3);
  std::set<std::vector<Node>> clusters;
  for (auto c : back.clusters()) clusters.insert(c);
  CHECK(clusters == std::set<std::vector<Node>>{{0}, {1, 2, 3}, {4, 5, 6}});

  CHECK(partition_to_multicut(inst, Partition(std::vector<std::uint32_t>(7, 0))) == EdgeLabeling(10, 0));
  std::vector<std::uint32_t> single(5);
  std::iota(single.begin(), single.end(), 0u);
  CHECK(partition_to_multicut(CompleteInstance(5), Partition(single)) == EdgeLabeling(10, 1));

  // {0,3} is not connected in the path 0-1-2-3.
  const Instance path(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}});
  CHECK_THROWS_AS(partition_to_multicut(path, Partition(std::vector<std::uint32_t>{0, 1, 1, 0})), InfeasibleError);
  // Triangle with one cut edge between joined endpoints.
  const Instance tri(3, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}});
  CHECK_THROWS_AS(multicut_to_partition(tri, EdgeLabeling(std::vector<std::uint8_t>{1, 0, 0})), InfeasibleError);
  CHECK(multicut_to_partition(path, EdgeLabeling(3, 0)).cluster_count() == 1);
}

TEST_CASE("partition to multicut is a bijection") {
  // Exhaustive on K_n for n <= 6: distinct partitions give distinct multicuts
  // and the inverse recovers the partition.
  for (std::size_t n = 1; n <= 6; ++n) {
    const CompleteInstance ci(n);
    std::set<std::vector<std::uint8_t>> seen;
    for_each_partition(n, [&](const std::vector<std::uint32_t>& a) {
      const Partition p(a);
      const auto x = partition_to_multicut(ci, p);
      REQUIRE(is_multicut(ci, x));
      REQUIRE(seen.insert({x.begin(), x.end()}).second);
      REQUIRE(multicut_to_partition(ci, x) == p);
    });
  }
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 500; ++rep) {
    const auto inst = random_sparse(rng, 2 + rng() % 9, 0.5);
    const auto x = random_feasible(rng, inst);
    REQUIRE(partition_to_multicut(inst, multicut_to_partition(inst, x)) == x);
  }
}

TEST_CASE("completion of the fig2 instance") {
  const auto inst = golden_instance();
  const auto ci = complete(inst);
  CHECK(ci.node_count() == 7);
  CHECK(ci.pair_count() == 21);
  std::size_t zeros = 0;
  for (double c : ci.costs()) zeros += c == 0.0;
  CHECK(zeros == 11);
  for (const auto& e : inst.edges()) CHECK(ci.cost(e.i, e.j) == e.cost);
  CHECK(ci.abs_cost_sum() == 25.0);

  std::mt19937_64 rng(3);
  const auto k4 = random_complete(rng, 4);
  CHECK(complete(k4).to_instance() == k4);
}

TEST_CASE("completion preserves the optimum") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 60; ++rep) {
    const auto inst = random_sparse(rng, 3 + rng() % 5, 0.5);
    CHECK(oracle_optimum(complete(inst).to_instance()) == oracle_optimum(inst));
  }
}

TEST_CASE("normalization") {
  const auto n2 = normalize(complete(golden_instance()));
  CHECK(n2.normalized());
  CHECK(n2.abs_cost_sum() == doctest::Approx(21.0).epsilon(1e-12));
  const auto raw = complete(golden_instance()).costs();
  const auto scaled = n2.costs();
  for (std::size_t p = 0; p < raw.size(); ++p) CHECK(scaled[p] == doctest::Approx(raw[p] * 0.84).epsilon(1e-12));

  const auto two = normalize(CompleteInstance(3, std::vector<double>{2.0, -2.0, 2.0}));
  CHECK(two.costs() == std::vector<double>{1.0, -1.0, 1.0});

  const auto zero = normalize(CompleteInstance(4));
  CHECK(zero.normalized());
  CHECK(zero.costs() == std::vector<double>(6, 0.0));

  const CompleteInstance already(3, std::vector<double>{1.0, -1.0, 1.0});
  CHECK(normalize(already).costs() == already.costs());
}

TEST_CASE("normalized invariant on random instances") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rng() % 20;
    const auto ci = normalize(complete(random_continuous(rng, n)));
    CHECK(std::abs(ci.abs_cost_sum() - static_cast<double>(pair_count(n))) <= 1e-9 * pair_count(n));
  }
}

TEST_CASE("contraction examples") {
  const CompleteInstance k3(3, std::vector<double>{5, -2, 3});
  auto [k2, rec] = contract(k3, 0, 1);
  CHECK(k2.node_count() == 2);
  CHECK(k2.cost(0, 1) == 1.0);
  CHECK(rec.old_to_new[0] == 0);
  CHECK(rec.old_to_new[1] == 0);
  CHECK(rec.old_to_new[2] == 1);

  auto [k1, rec1] = contract(k2, 0, 1);
  CHECK(k1.node_count() == 1);
  CHECK(k1.pair_count() == 0);
  CHECK_THROWS_AS(contract(k3, 1, 1), InputError);
  CHECK_THROWS_AS(contract(k3, 0, 3), InputError);
}

TEST_CASE("contraction follows the definition and lifts consistently") {
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rng() % 7;
    const auto ci = complete(random_complete(rng, n));
    const Node i = rng() % n;
    Node j = rng() % n;
    while (j == i) j = rng() % n;
    const auto [cc, rec] = contract(ci, i, j);
    REQUIRE(cc.node_count() == n - 1);
    // Every old pair maps to the sum of the old pairs it absorbed.
    std::vector<double> expect(cc.pair_count(), 0.0);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        const Node x = rec.old_to_new[a], y = rec.old_to_new[b];
        if (x != y) expect[pair_index(n - 1, x, y)] += ci.cost(a, b);
      }
    REQUIRE(cc.costs() == expect);
    REQUIRE(rec.old_to_new[i] == rec.old_to_new[j]);

    // Lift a random feasible labeling of the contracted instance.
    const auto xc = random_feasible(rng, cc.to_instance());
    const auto x = lift(rec, xc);
    REQUIRE(is_multicut(ci, x));
    REQUIRE(x[pair_index(n, i, j)] == 0);
    REQUIRE(objective(ci, x) == doctest::Approx(objective(cc, xc)));
  }
}

TEST_CASE("objective") {
  const auto inst = golden_instance();
  CHECK(objective(inst, EdgeLabeling(10, 0)) == 0.0);
  double sum = 0.0;
  for (const auto& e : inst.edges()) sum += e.cost;
  CHECK(objective(inst, EdgeLabeling(10, 1)) == sum);
  CHECK_THROWS_AS(objective(inst, EdgeLabeling(9)), InputError);
}

TEST_CASE("restriction of a completed labeling") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 100; ++rep) {
    const auto inst = random_sparse(rng, 3 + rng() % 6, 0.4);
    const auto ci = complete(inst);
    const auto full = random_feasible(rng, ci.to_instance());
    const auto x = restrict_to(inst, full);
    REQUIRE(is_multicut(inst, x));
    REQUIRE(objective(inst, x) == objective(ci, full));
  }
}

TEST_CASE("scaling leaves the optimal labelings unchanged") {
  std::mt19937_64 rng(37);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 3 + rng() % 4;
    const auto inst = random_complete(rng, n);
    const double lambda = 0.37 + (rng() % 100) / 10.0;
    std::vector<Edge> scaled(inst.edges().begin(), inst.edges().end());
    for (auto& e : scaled) e.cost *= lambda;
    const Instance s(n, scaled);
    auto optimal_set = [](const Instance& g) {
      const double best = oracle_optimum(g);
      std::set<std::vector<std::uint8_t>> out;
      for_each_partition(g.node_count(), [&](const std::vector<std::uint32_t>& a) {
        EdgeLabeling x(g.edge_count());
        for (std::size_t e = 0; e < g.edge_count(); ++e) x[e] = a[g.edge(e).i] != a[g.edge(e).j];
        if (std::abs(objective(g, x) - best) <= 1e-9 * (1 + std::abs(best))) out.insert({x.begin(), x.end()});
      });
      return out;
    };
    REQUIRE(optimal_set(inst) == optimal_set(s));
  }
}
