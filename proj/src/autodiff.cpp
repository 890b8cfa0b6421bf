#include "multicut/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "multicut/error.hpp"

namespace mc::ad {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values)
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value in ") + what);
}

void LinearLayer::zero_grad() {
  weight_grad.fill(0.0);
  std::fill(bias_grad.begin(), bias_grad.end(), 0.0);
}

void LinearLayer::init_uniform(std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(in_dim(), 1)));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& w : weight.flat()) w = dist(rng);
  for (double& b : bias) b = dist(rng);
}

void matvec_accumulate(const Tensor2& w, std::span<const double> x, std::span<double> out) {
  const std::size_t in = w.cols();
  for (std::size_t o = 0; o < w.rows(); ++o) {
    const double* row = w.row(o).data();
    double s = 0.0;
    for (std::size_t c = 0; c < in; ++c) s += row[c] * x[c];
    out[o] += s;
  }
}

void matvec_transposed_accumulate(const Tensor2& w, std::span<const double> g, std::span<double> out) {
  const std::size_t in = w.cols();
  for (std::size_t o = 0; o < w.rows(); ++o) {
    const double* row = w.row(o).data();
    const double go = g[o];
    if (go == 0.0) continue;
    for (std::size_t c = 0; c < in; ++c) out[c] += row[c] * go;
  }
}

void outer_accumulate(Tensor2& grad, std::span<const double> g, std::span<const double> x) {
  const std::size_t in = grad.cols();
  for (std::size_t o = 0; o < grad.rows(); ++o) {
    double* row = grad.row(o).data();
    const double go = g[o];
    if (go == 0.0) continue;
    for (std::size_t c = 0; c < in; ++c) row[c] += go * x[c];
  }
}

Tensor2 linear_forward(const LinearLayer& layer, const Tensor2& input) {
  if (input.cols() != layer.in_dim())
    throw InputError("linear layer expects " + std::to_string(layer.in_dim()) + " input columns, got " +
                     std::to_string(input.cols()));
  Tensor2 out(input.rows(), layer.out_dim());
  for (std::size_t r = 0; r < input.rows(); ++r) {
    auto y = out.row(r);
    std::copy(layer.bias.begin(), layer.bias.end(), y.begin());
    matvec_accumulate(layer.weight, input.row(r), y);
  }
  return out;
}

Tensor2 linear_backward(LinearLayer& layer, const Tensor2& input, const Tensor2& upstream) {
  if (upstream.rows() != input.rows() || upstream.cols() != layer.out_dim() || input.cols() != layer.in_dim())
    throw InputError("linear_backward shape mismatch");
  Tensor2 dx(input.rows(), layer.in_dim());
  for (std::size_t r = 0; r < input.rows(); ++r) {
    const auto g = upstream.row(r);
    outer_accumulate(layer.weight_grad, g, input.row(r));
    for (std::size_t o = 0; o < g.size(); ++o) layer.bias_grad[o] += g[o];
    matvec_transposed_accumulate(layer.weight, g, dx.row(r));
  }
  return dx;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
  return cdf + x * pdf;
}

Tensor2 gelu(const Tensor2& x) {
  Tensor2 y(x.rows(), x.cols());
  auto in = x.flat();
  auto out = y.flat();
  for (std::size_t k = 0; k < in.size(); ++k) out[k] = gelu(in[k]);
  return y;
}

Tensor2 gelu_backward(const Tensor2& input, const Tensor2& upstream) {
  if (input.rows() != upstream.rows() || input.cols() != upstream.cols())
    throw InputError("gelu_backward shape mismatch");
  Tensor2 dx(input.rows(), input.cols());
  auto in = input.flat();
  auto g = upstream.flat();
  auto out = dx.flat();
  for (std::size_t k = 0; k < in.size(); ++k) out[k] = g[k] * gelu_derivative(in[k]);
  return dx;
}

void LayerNorm::zero_grad() {
  std::fill(gain_grad.begin(), gain_grad.end(), 0.0);
  std::fill(shift_grad.begin(), shift_grad.end(), 0.0);
}

Tensor2 layer_norm_forward(const LayerNorm& norm, const Tensor2& x, LayerNormCache* cache) {
  const std::size_t d = x.cols();
  if (d != norm.dim()) throw InputError("layer norm dimension mismatch");
  if (d < 2) throw InputError("layer norm needs at least two features");
  Tensor2 y(x.rows(), d);
  if (cache) {
    cache->normalized = Tensor2(x.rows(), d);
    cache->inv_std.assign(x.rows(), 0.0);
  }
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + kLayerNormEpsilon);
    auto out = y.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      const double xhat = (row[c] - mean) * inv;
      if (cache) cache->normalized(r, c) = xhat;
      out[c] = norm.affine ? xhat * norm.gain[c] + norm.shift[c] : xhat;
    }
    if (cache) cache->inv_std[r] = inv;
  }
  return y;
}

Tensor2 layer_norm_backward(LayerNorm& norm, const LayerNormCache& cache, const Tensor2& upstream) {
  const std::size_t d = upstream.cols();
  Tensor2 dx(upstream.rows(), d);
  std::vector<double> dxhat(d);
  for (std::size_t r = 0; r < upstream.rows(); ++r) {
    const auto g = upstream.row(r);
    const auto xhat = cache.normalized.row(r);
    double sum = 0.0, dot = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      if (norm.affine) {
        norm.gain_grad[c] += g[c] * xhat[c];
        norm.shift_grad[c] += g[c];
        dxhat[c] = g[c] * norm.gain[c];
      } else {
        dxhat[c] = g[c];
      }
      sum += dxhat[c];
      dot += dxhat[c] * xhat[c];
    }
    const double inv = cache.inv_std[r];
    const double dd = static_cast<double>(d);
    auto out = dx.row(r);
    for (std::size_t c = 0; c < d; ++c) out[c] = inv * (dxhat[c] - sum / dd - xhat[c] * dot / dd);
  }
  return dx;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_with_logits(std::span<const double> logits, std::span<const std::uint8_t> targets,
                       std::vector<double>* grad) {
  if (logits.empty()) throw InputError("bce_with_logits on empty input");
  if (logits.size() != targets.size()) throw InputError("bce_with_logits length mismatch");
  const double inv = 1.0 / static_cast<double>(logits.size());
  double loss = 0.0;
  if (grad) grad->assign(logits.size(), 0.0);
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const double z = logits[k];
    const double t = targets[k] ? 1.0 : 0.0;
    loss += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
    if (grad) (*grad)[k] = (sigmoid(z) - t) * inv;
  }
  return loss * inv;
}

void adam_step(std::span<const ParamBlock> params, AdamState& state, double lr) {
  if (state.first.size() != params.size()) {
    state.first.resize(params.size());
    state.second.resize(params.size());
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (state.first[b].size() != params[b].value.size()) {
      state.first[b].assign(params[b].value.size(), 0.0);
      state.second[b].assign(params[b].value.size(), 0.0);
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto& m = state.first[b];
    auto& v = state.second[b];
    const auto& p = params[b];
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g;
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g * g;
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      p.value[k] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

double cosine_lr(std::size_t epoch, std::size_t total, double lr_max, double lr_min) {
  if (total == 0) throw InputError("cosine_lr needs total > 0");
  if (epoch > total) throw InputError("cosine_lr epoch beyond schedule");
  const double phase = std::numbers::pi * static_cast<double>(epoch) / static_cast<double>(total);
  return lr_min + (lr_max - lr_min) * (1.0 + std::cos(phase)) / 2.0;
}

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& b : blocks) m = std::max(m, b.max_rel_error);
  return m;
}

GradCheckReport grad_check(std::span<const ParamBlock> blocks, const std::function<double()>& loss, double h,
                           std::size_t max_per_block) {
  GradCheckReport report;
  for (const auto& block : blocks) {
    GradCheckEntry entry{block.name, 0, 0.0};
    const std::size_t size = block.value.size();
    std::size_t stride = 1;
    if (max_per_block > 0 && size > max_per_block) stride = (size + max_per_block - 1) / max_per_block;
    for (std::size_t k = 0; k < size; k += stride) {
      const double saved = block.value[k];
      block.value[k] = saved + h;
      const double up = loss();
      block.value[k] = saved - h;
      const double down = loss();
      block.value[k] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = block.grad[k];
      const double scale = std::max({std::abs(numeric), std::abs(analytic), kGradCheckFloor});
      entry.max_rel_error = std::max(entry.max_rel_error, std::abs(numeric - analytic) / scale);
      ++entry.checked;
    }
    report.blocks.push_back(std::move(entry));
  }
  return report;
}

} // namespace mc::ad
