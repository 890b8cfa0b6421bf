#include "multicut/diagnostics.hpp"

#include <random>

#include "multicut/core.hpp"
#include "multicut/tmp.hpp"

namespace mc {

namespace {

using ad::ParamBlock;
using ad::Tensor2;

void fill_uniform(std::span<double> v, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  for (auto& x : v) x = d(rng);
}

Tensor2 random_tensor(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  Tensor2 t(r, c);
  fill_uniform(t.flat(), rng);
  return t;
}

// Contracts y with a fixed random tensor so every output entry matters.
double project(const Tensor2& y, const Tensor2& r) {
  double s = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) s += y.flat()[k] * r.flat()[k];
  return s;
}

void randomize_norm(ad::LayerNorm& n, std::mt19937_64& rng) {
  fill_uniform(n.gain, rng, 0.5, 1.5);
  fill_uniform(n.shift, rng, -0.5, 0.5);
}

GradCheckCase check_linear(std::mt19937_64& rng) {
  ad::LinearLayer layer(4, 5);
  layer.init_uniform(rng);
  Tensor2 x = random_tensor(3, 4, rng);
  const Tensor2 r = random_tensor(3, 5, rng);
  Tensor2 dx = ad::linear_backward(layer, x, r);
  std::vector<ParamBlock> blocks{{"weight", layer.weight.flat(), layer.weight_grad.flat()},
                                 {"bias", layer.bias, layer.bias_grad},
                                 {"input", x.flat(), dx.flat()}};
  return {"linear", ad::grad_check(blocks, [&] { return project(ad::linear_forward(layer, x), r); })};
}

GradCheckCase check_gelu(std::mt19937_64& rng) {
  Tensor2 x = random_tensor(4, 6, rng);
  for (auto& v : x.flat()) v *= 3.0;
  const Tensor2 r = random_tensor(4, 6, rng);
  Tensor2 dx = ad::gelu_backward(x, r);
  std::vector<ParamBlock> blocks{{"input", x.flat(), dx.flat()}};
  return {"gelu", ad::grad_check(blocks, [&] { return project(ad::gelu(x), r); })};
}

GradCheckCase check_layer_norm(std::mt19937_64& rng, bool affine) {
  ad::LayerNorm norm(6, affine);
  randomize_norm(norm, rng);
  Tensor2 x = random_tensor(4, 6, rng);
  const Tensor2 r = random_tensor(4, 6, rng);
  ad::LayerNormCache cache;
  ad::layer_norm_forward(norm, x, &cache);
  Tensor2 dx = ad::layer_norm_backward(norm, cache, r);
  std::vector<ParamBlock> blocks{{"input", x.flat(), dx.flat()}};
  if (affine) {
    blocks.push_back({"gain", norm.gain, norm.gain_grad});
    blocks.push_back({"shift", norm.shift, norm.shift_grad});
  }
  return {affine ? "layer_norm" : "layer_norm_plain",
          ad::grad_check(blocks, [&] { return project(ad::layer_norm_forward(norm, x), r); })};
}

GradCheckCase check_bce(std::mt19937_64& rng) {
  std::vector<double> z(12);
  fill_uniform(z, rng, -4.0, 4.0);
  std::vector<std::uint8_t> t(z.size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = static_cast<std::uint8_t>(k % 3 == 0);
  std::vector<double> dz;
  ad::bce_with_logits(z, t, &dz);
  std::vector<ParamBlock> blocks{{"logits", z, dz}};
  return {"bce_with_logits", ad::grad_check(blocks, [&] { return ad::bce_with_logits(z, t); })};
}

GradCheckCase check_mlp(std::mt19937_64& rng) {
  Mlp mlp(3, 5, 2, 2, false);
  for (auto& s : mlp.stages) s.init_uniform(rng);
  Tensor2 x = random_tensor(4, 3, rng);
  const Tensor2 r = random_tensor(4, 2, rng);
  MlpCache cache;
  mlp.forward(x, &cache);
  Tensor2 dx = mlp.backward(cache, r);
  std::vector<ParamBlock> blocks;
  for (std::size_t t = 0; t < mlp.stages.size(); ++t) {
    auto& s = mlp.stages[t];
    blocks.push_back({"stage" + std::to_string(t) + ".weight", s.weight.flat(), s.weight_grad.flat()});
    blocks.push_back({"stage" + std::to_string(t) + ".bias", s.bias, s.bias_grad});
  }
  blocks.push_back({"input", x.flat(), dx.flat()});
  return {"mlp", ad::grad_check(blocks, [&] { return project(mlp.forward(x), r); })};
}

GradCheckCase check_layer(std::mt19937_64& rng, const std::string& name, TmpLayer::Options opt) {
  const std::size_t n = 5;
  TmpLayer layer(opt);
  layer.init(rng);
  if (layer.norm && layer.norm->affine) randomize_norm(*layer.norm, rng);
  EdgeFeatureField field(n, random_tensor(pair_count(n), opt.in, rng));
  const Tensor2 r = random_tensor(pair_count(n), opt.out, rng);
  TmpLayerCache cache;
  layer.zero_grad();
  layer.forward(field, &cache);
  EdgeFeatureField upstream(n, r);
  EdgeFeatureField dx = layer.backward(cache, upstream);
  std::vector<ParamBlock> blocks;
  layer.collect(name, blocks);
  blocks.push_back({"input", field.data().flat(), dx.data().flat()});
  return {name, ad::grad_check(blocks, [&] { return project(layer.forward(field).data(), r); })};
}

GradCheckCase check_model(std::mt19937_64& rng) {
  ModelConfig cfg;
  cfg.layers = 2;
  cfg.width = 4;
  TmpModel model(cfg, rng());
  for (auto& l : model.layers())
    if (l.norm && l.norm->affine) randomize_norm(*l.norm, rng);

  const std::size_t n = 5;
  std::vector<double> costs(pair_count(n));
  fill_uniform(costs, rng);
  const CompleteInstance ci = normalize(CompleteInstance(n, costs));
  std::vector<std::uint8_t> target(costs.size());
  for (std::size_t k = 0; k < target.size(); ++k) target[k] = static_cast<std::uint8_t>(rng() & 1);

  model.zero_grad();
  TmpModel::Tape tape;
  std::vector<double> dz;
  ad::bce_with_logits(model.forward(ci, &tape), target, &dz);
  model.backward(tape, dz);
  const auto blocks = model.parameters();
  return {"model_2x4_n5", ad::grad_check(blocks, [&] { return ad::bce_with_logits(model.logits(ci), target); })};
}

} // namespace

std::vector<GradCheckCase> run_gradcheck_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GradCheckCase> out;
  out.push_back(check_linear(rng));
  out.push_back(check_gelu(rng));
  out.push_back(check_layer_norm(rng, true));
  out.push_back(check_layer_norm(rng, false));
  out.push_back(check_bce(rng));
  out.push_back(check_mlp(rng));

  TmpLayer::Options tri;
  tri.in = 3;
  tri.out = 3;
  tri.hidden_width = 4;
  tri.layer_norm = true;
  tri.residual = true;
  out.push_back(check_layer(rng, "triangle_layer", tri));

  TmpLayer::Options deep = tri;
  deep.mlp_hidden_layers = 1;
  deep.layer_norm_affine = false;
  out.push_back(check_layer(rng, "triangle_layer_deep_mlp", deep));

  TmpLayer::Options edge = tri;
  edge.scheme = MessageScheme::Edge;
  out.push_back(check_layer(rng, "edge_layer", edge));

  TmpLayer::Options last;
  last.in = 3;
  last.out = 1;
  last.hidden_width = 4;
  last.output_layer = true;
  out.push_back(check_layer(rng, "output_layer", last));

  out.push_back(check_model(rng));
  return out;
}

} // namespace mc
