#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "multicut/config.hpp"
#include "multicut/error.hpp"
#include "multicut/tmp.hpp"
#include "support.hpp"

using namespace mc;
using namespace mc::testing;
using ad::Tensor2;

namespace {

std::vector<double> apply_mlp(const Mlp& mlp, std::vector<double> x) {
  for (std::size_t t = 0; t < mlp.stages.size(); ++t) {
    const auto& s = mlp.stages[t];
    std::vector<double> y(s.out_dim());
    for (std::size_t o = 0; o < s.out_dim(); ++o) {
      double acc = s.bias[o];
      for (std::size_t c = 0; c < s.in_dim(); ++c) acc += s.weight(o, c) * x[c];
      const bool act = t + 1 < mlp.stages.size() || mlp.final_activation;
      y[o] = act ? acc * 0.5 * (1.0 + std::erf(acc / std::sqrt(2.0))) : acc;
    }
    x = std::move(y);
  }
  return x;
}

// Direct triple loop over the layer equations.
Tensor2 naive_layer(const TmpLayer& layer, const EdgeFeatureField& f) {
  const std::size_t n = f.node_count(), d = f.width();
  Tensor2 out(pair_count(n), layer.out_dim());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto hij = f.at(i, j);
      std::vector<double> m(d, 0.0);
      std::size_t count = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        const auto hik = f.at(i, k), hjk = f.at(j, k);
        if (layer.scheme() == MessageScheme::Triangle) {
          std::vector<double> in(hij.begin(), hij.end());
          for (std::size_t c = 0; c < d; ++c) in.push_back(hik[c] + hjk[c]);
          for (std::size_t c = 0; c < d; ++c) in.push_back(std::abs(hik[c] - hjk[c]));
          const auto msg = apply_mlp(layer.message, in);
          for (std::size_t c = 0; c < d; ++c) m[c] += msg[c];
          ++count;
        } else {
          for (const auto nb : {hik, hjk}) {
            std::vector<double> in(hij.begin(), hij.end());
            in.insert(in.end(), nb.begin(), nb.end());
            const auto msg = apply_mlp(layer.message, in);
            for (std::size_t c = 0; c < d; ++c) m[c] += msg[c];
            ++count;
          }
        }
      }
      for (auto& v : m) v /= static_cast<double>(count);
      std::vector<double> uin(hij.begin(), hij.end());
      uin.insert(uin.end(), m.begin(), m.end());
      auto y = apply_mlp(layer.update, uin);
      if (layer.has_residual())
        for (std::size_t c = 0; c < y.size(); ++c) y[c] += hij[c];
      if (layer.norm) {
        const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
        double var = 0.0;
        for (double v : y) var += (v - mean) * (v - mean);
        var /= static_cast<double>(y.size());
        for (std::size_t c = 0; c < y.size(); ++c)
          y[c] = (y[c] - mean) / std::sqrt(var + ad::kLayerNormEpsilon) * layer.norm->gain[c] + layer.norm->shift[c];
      }
      auto row = out.row(pair_index(n, i, j));
      std::copy(y.begin(), y.end(), row.begin());
    }
  return out;
}

EdgeFeatureField random_field(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::uniform_real_distribution<double> u(-1, 1);
  EdgeFeatureField f(n, d);
  for (auto& v : f.data().flat()) v = u(rng);
  return f;
}

double max_abs_diff(const Tensor2& a, const Tensor2& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.flat()[k] - b.flat()[k]));
  return m;
}

TmpLayer make_layer(std::mt19937_64& rng, MessageScheme scheme, std::size_t mlp_hidden, bool out_layer) {
  TmpLayer::Options o;
  o.in = 4;
  o.out = out_layer ? 1 : 4;
  o.hidden_width = 5;
  o.mlp_hidden_layers = mlp_hidden;
  o.output_layer = out_layer;
  o.layer_norm = !out_layer;
  o.residual = !out_layer;
  o.scheme = scheme;
  TmpLayer l(o);
  l.init(rng);
  if (l.norm)
    for (std::size_t c = 0; c < l.norm->dim(); ++c) {
      l.norm->gain[c] = 0.5 + 0.1 * static_cast<double>(c);
      l.norm->shift[c] = -0.2 + 0.05 * static_cast<double>(c);
    }
  return l;
}

} // namespace

TEST_CASE("triangle layer matches the direct evaluation") {
  std::mt19937_64 rng(2);
  for (auto scheme : {MessageScheme::Triangle, MessageScheme::Edge})
    for (std::size_t hidden : {0u, 2u})
      for (bool out_layer : {false, true}) {
        auto layer = make_layer(rng, scheme, hidden, out_layer);
        for (std::size_t n : {3u, 5u}) {
          const auto f = random_field(rng, n, 4);
          CHECK(max_abs_diff(layer.forward(f).data(), naive_layer(layer, f)) < 1e-12);
        }
      }
}

TEST_CASE("layer input checks") {
  std::mt19937_64 rng(3);
  auto layer = make_layer(rng, MessageScheme::Triangle, 0, false);
  CHECK_THROWS_AS(layer.forward(random_field(rng, 2, 4)), InputError);
  CHECK_THROWS_AS(layer.forward(random_field(rng, 4, 3)), InputError);
}

TEST_CASE("messages are symmetric in the two side edges") {
  // Swapping h_ik and h_jk for every k is the relabeling i <-> j, which must
  // leave the output of pair (i,j) unchanged.
  std::mt19937_64 rng(4);
  auto layer = make_layer(rng, MessageScheme::Triangle, 1, false);
  const std::size_t n = 6;
  const auto f = random_field(rng, n, 4);
  EdgeFeatureField g(n, 4);
  std::vector<Node> pi(n);
  std::iota(pi.begin(), pi.end(), 0u);
  std::swap(pi[1], pi[3]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto src = f.at(i, j);
      auto dst = g.at(pi[i], pi[j]);
      std::copy(src.begin(), src.end(), dst.begin());
    }
  const auto a = layer.forward(f), b = layer.forward(g);
  for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(a.at(1, 3)[c] - b.at(1, 3)[c]) < 1e-12);
}

TEST_CASE("model logits are permutation equivariant") {
  std::mt19937_64 rng(5);
  TmpModel model(ModelConfig::small(), 9);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 7;
    const auto ci = normalize(complete(random_continuous(rng, n)));
    std::vector<Node> pi(n);
    std::iota(pi.begin(), pi.end(), 0u);
    std::shuffle(pi.begin(), pi.end(), rng);
    const auto costs = ci.costs();
    const auto permuted = CompleteInstance(n, permute_costs(n, costs, pi), true);
    const auto z = model.logits(ci);
    const auto zp = model.logits(permuted);
    const auto expect = permute_costs(n, z, pi);
    for (std::size_t p = 0; p < z.size(); ++p) REQUIRE(std::abs(zp[p] - expect[p]) < 1e-9);
  }
}

TEST_CASE("model contract and degenerate sizes") {
  TmpModel model(ModelConfig::small(), 1);
  CHECK_THROWS_AS(model.logits(CompleteInstance(4)), ContractViolation);
  const CompleteInstance k2(2, std::vector<double>{-1.0}, true);
  CHECK(model.logits(k2) == std::vector<double>{-1.0});
  CHECK(model.logits(CompleteInstance(1, std::vector<double>{}, true)).empty());
}

TEST_CASE("zero parameters give the output bias everywhere") {
  TmpModel model(ModelConfig::small(), 1);
  for (auto& b : model.parameters()) std::fill(b.value.begin(), b.value.end(), 0.0);
  model.layers().back().update.stages.back().bias[0] = 0.3;
  std::mt19937_64 rng(6);
  const auto z = model.logits(normalize(complete(random_continuous(rng, 6))));
  for (double v : z) CHECK(v == 0.3);
}

TEST_CASE("parameter counts") {
  ModelConfig cfg = ModelConfig::full_size();
  const TmpModel full(cfg);
  // embed: M 3->1, U 2->64; hidden: M 192->64, U 128->64, norm 128;
  // output: M 192->64, U 128->1.
  const std::size_t expect = 4 + 192 + 18 * (12352 + 8256 + 128) + 12352 + 129;
  CHECK(count_parameters(full) == expect);
  cfg.layer_norm = false;
  CHECK(count_parameters(TmpModel(cfg)) == expect - 2 * 64 * 18);
  CHECK(parameter_breakdown(full).find("total " + std::to_string(expect)) != std::string::npos);
}

TEST_CASE("model config text round trip") {
  ModelConfig cfg;
  cfg.layers = 7;
  cfg.width = 12;
  cfg.mlp_hidden_layers = 2;
  cfg.embed_layer_norm = true;
  cfg.layer_norm_affine = false;
  cfg.residual = false;
  cfg.message_scheme = MessageScheme::Edge;
  CHECK(model_config_from(KeyValues::parse(to_text(cfg))) == cfg);
  CHECK_THROWS_AS(model_config_from(KeyValues::parse("message_scheme=cubes")), InputError);
}

TEST_CASE("forward time grows cubically") {
  TmpModel model(ModelConfig::small(), 2);
  std::mt19937_64 rng(8);
  auto time_at = [&](std::size_t n) {
    const auto ci = normalize(complete(random_continuous(rng, n)));
    double best = 1e9;
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      (void)model.logits(ci);
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
  };
  const double ratio = time_at(100) / time_at(50);
  CHECK(ratio >= 6.0);
  CHECK(ratio <= 10.0);
}
