#include <cmath>
#include <random>

#include "doctest.h"
#include "multicut/autodiff.hpp"
#include "multicut/diagnostics.hpp"
#include "multicut/error.hpp"

using namespace mc;
using namespace mc::ad;

TEST_CASE("linear layer identities") {
  LinearLayer l(3, 3);
  for (std::size_t k = 0; k < 3; ++k) l.weight(k, k) = 1.0;
  Tensor2 x(2, 3);
  for (std::size_t k = 0; k < x.size(); ++k) x.flat()[k] = 0.5 * static_cast<double>(k) - 1.0;
  CHECK(linear_forward(l, x) == x);

  LinearLayer b(4, 2);
  b.bias = {1.5, -2.0};
  const auto y = linear_forward(b, Tensor2(3, 4));
  for (std::size_t r = 0; r < 3; ++r) {
    CHECK(y(r, 0) == 1.5);
    CHECK(y(r, 1) == -2.0);
  }
  CHECK_THROWS_AS(linear_forward(b, Tensor2(1, 3)), InputError);
  CHECK(LinearLayer(3, 1).parameter_count() == 4);
}

TEST_CASE("gelu values") {
  CHECK(gelu(0.0) == 0.0);
  // x * Phi(x) at 1 with Phi(1) = 0.8413447460685429...
  CHECK(gelu(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
  CHECK(gelu(-1.0) == doctest::Approx(-0.15865525393145707).epsilon(1e-14));
  CHECK(gelu_derivative(0.0) == doctest::Approx(0.5));
}

TEST_CASE("layer norm identities") {
  LayerNorm n(5, true);
  Tensor2 c(2, 5, 3.25);
  const auto z = layer_norm_forward(n, c);
  for (double v : z.flat()) CHECK(v == 0.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-5, 5);
  Tensor2 x(10, 7);
  for (auto& v : x.flat()) v = d(rng);
  LayerNorm s(7, true);
  for (auto& v : s.shift) v = 0.75;
  const auto y = layer_norm_forward(s, x);
  for (std::size_t r = 0; r < 10; ++r) {
    double mean = 0.0;
    for (double v : y.row(r)) mean += v;
    CHECK(std::abs(mean / 7.0 - 0.75) < 1e-9);
  }
  CHECK_THROWS_AS(layer_norm_forward(LayerNorm(1, true), Tensor2(1, 1)), InputError);
}

TEST_CASE("bce with logits") {
  const std::vector<std::uint8_t> t{0, 1, 1, 0};
  CHECK(bce_with_logits(std::vector<double>(4, 0.0), t) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(bce_with_logits(std::vector<double>{50.0}, std::vector<std::uint8_t>{1}) < 1e-20);
  for (double z : {1e4, -1e4}) {
    CHECK(std::isfinite(bce_with_logits(std::vector<double>{z}, std::vector<std::uint8_t>{0})));
    CHECK(std::isfinite(bce_with_logits(std::vector<double>{z}, std::vector<std::uint8_t>{1})));
  }
  std::vector<double> g;
  bce_with_logits(std::vector<double>{0.0, 2.0}, std::vector<std::uint8_t>{1, 0}, &g);
  CHECK(g[0] == doctest::Approx((0.5 - 1.0) / 2.0));
  CHECK(g[1] == doctest::Approx(sigmoid(2.0) / 2.0));
  CHECK_THROWS_AS(bce_with_logits(std::vector<double>{}, std::vector<std::uint8_t>{}), InputError);
  CHECK_THROWS_AS(bce_with_logits(std::vector<double>{1.0}, std::vector<std::uint8_t>{}), InputError);
}

TEST_CASE("adam steps") {
  std::vector<double> v{0.0}, g{1.0};
  std::vector<ParamBlock> blocks{{"p", v, g}};
  AdamState s;
  adam_step(blocks, s, 1e-4);
  CHECK(v[0] == doctest::Approx(-1e-4 / (1.0 + 1e-8)).epsilon(1e-12));
  const double first = v[0];
  adam_step(blocks, s, 1e-4);
  CHECK(std::abs(v[0] - first) <= std::abs(first) * (1.0 + 1e-3));

  std::vector<double> w{1.0, 2.0}, zero{0.0, 0.0};
  std::vector<ParamBlock> zb{{"w", w, zero}};
  AdamState z;
  adam_step(zb, z, 1e-3);
  CHECK(w == std::vector<double>{1.0, 2.0});

  std::vector<double> u{3.0}, gu{0.7};
  std::vector<ParamBlock> ub{{"u", u, gu}};
  AdamState lr0;
  adam_step(ub, lr0, 0.0);
  CHECK(u[0] == 3.0);
}

TEST_CASE("cosine schedule") {
  CHECK(cosine_lr(0, 500, 1e-4, 1e-6) == doctest::Approx(1e-4).epsilon(1e-15));
  CHECK(cosine_lr(500, 500, 1e-4, 1e-6) == doctest::Approx(1e-6).epsilon(1e-12));
  CHECK(cosine_lr(250, 500, 1e-4, 1e-6) == doctest::Approx(5.05e-5).epsilon(1e-12));
  CHECK_THROWS_AS(cosine_lr(0, 0, 1e-4, 1e-6), InputError);
  CHECK_THROWS_AS(cosine_lr(6, 5, 1e-4, 1e-6), InputError);
}

TEST_CASE("finite value guard") {
  CHECK_NOTHROW(require_finite(std::vector<double>{1.0, -2.0}, "x"));
  CHECK_THROWS_AS(require_finite(std::vector<double>{1.0, std::nan("")}, "x"), NumericError);
}

TEST_CASE("every kernel passes its gradient check") {
  for (const auto& c : run_gradcheck_suite(7)) {
    INFO(c.name);
    const bool kernel = c.name.find("layer") == std::string::npos && c.name.find("model") == std::string::npos;
    // Single kernels are held to the tighter bound.
    CHECK(c.report.max_rel_error() < (kernel ? 1e-6 : 1e-4));
    for (const auto& b : c.report.blocks) CHECK(b.checked > 0);
  }
}
