#pragma once

// Hand-written forward/backward kernels for the fixed message passing
// architecture. Double precision throughout.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace mc::ad {

class Tensor2 {
public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }
  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const Tensor2&, const Tensor2&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Throws NumericError if any entry is NaN or infinite.
void require_finite(std::span<const double> values, const char* what);

// Affine map y = x W^T + b with W stored out x in.
struct LinearLayer {
  LinearLayer() = default;
  LinearLayer(std::size_t in, std::size_t out)
      : weight(out, in), bias(out, 0.0), weight_grad(out, in), bias_grad(out, 0.0) {}

  std::size_t in_dim() const noexcept { return weight.cols(); }
  std::size_t out_dim() const noexcept { return weight.rows(); }
  std::size_t parameter_count() const noexcept { return weight.size() + bias.size(); }
  void zero_grad();
  // Uniform in +-1/sqrt(in) for weights and biases.
  void init_uniform(std::mt19937_64& rng);

  Tensor2 weight;
  std::vector<double> bias;
  Tensor2 weight_grad;
  std::vector<double> bias_grad;
};

Tensor2 linear_forward(const LinearLayer& layer, const Tensor2& input);
// Accumulates weight/bias gradients and returns dL/dinput.
Tensor2 linear_backward(LinearLayer& layer, const Tensor2& input, const Tensor2& upstream);

// out += W x for a single vector (no bias).
void matvec_accumulate(const Tensor2& w, std::span<const double> x, std::span<double> out);
// out += W^T g.
void matvec_transposed_accumulate(const Tensor2& w, std::span<const double> g, std::span<double> out);
// grad += g x^T.
void outer_accumulate(Tensor2& grad, std::span<const double> g, std::span<const double> x);

// x * Phi(x) with the exact erf form.
double gelu(double x);
double gelu_derivative(double x);
Tensor2 gelu(const Tensor2& x);
Tensor2 gelu_backward(const Tensor2& input, const Tensor2& upstream);

inline constexpr double kLayerNormEpsilon = 1e-5;

struct LayerNorm {
  LayerNorm() = default;
  LayerNorm(std::size_t dim, bool affine)
      : affine(affine), gain(dim, 1.0), shift(dim, 0.0), gain_grad(dim, 0.0), shift_grad(dim, 0.0) {}

  std::size_t dim() const noexcept { return gain.size(); }
  std::size_t parameter_count() const noexcept { return affine ? 2 * gain.size() : 0; }
  void zero_grad();

  bool affine = true;
  std::vector<double> gain;
  std::vector<double> shift;
  std::vector<double> gain_grad;
  std::vector<double> shift_grad;
};

struct LayerNormCache {
  Tensor2 normalized; // (x - mean) / sqrt(var + eps)
  std::vector<double> inv_std;
};

Tensor2 layer_norm_forward(const LayerNorm& norm, const Tensor2& x, LayerNormCache* cache = nullptr);
Tensor2 layer_norm_backward(LayerNorm& norm, const LayerNormCache& cache, const Tensor2& upstream);

// Mean binary cross-entropy of sigmoid(z) against 0/1 targets, evaluated as
// max(z,0) - z*t + log1p(exp(-|z|)). Writes (sigmoid(z) - t)/|z| into grad.
double bce_with_logits(std::span<const double> logits, std::span<const std::uint8_t> targets,
                       std::vector<double>* grad = nullptr);

double sigmoid(double z);

// View of one learnable tensor and its gradient.
struct ParamBlock {
  std::string name;
  std::span<double> value;
  std::span<double> grad;
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first;  // one per block
  std::vector<std::vector<double>> second; // one per block
};

// Bias-corrected Adam update of every block; lazily sizes the moments.
void adam_step(std::span<const ParamBlock> params, AdamState& state, double lr);

// lr_min + (lr_max - lr_min) (1 + cos(pi epoch / total)) / 2
double cosine_lr(std::size_t epoch, std::size_t total, double lr_max, double lr_min);

struct GradCheckEntry {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> blocks;
  double max_rel_error() const;
  bool passed(double tolerance) const { return max_rel_error() < tolerance; }
};

inline constexpr double kGradCheckStep = 1e-6;
// Gradients smaller than this are compared in absolute terms.
inline constexpr double kGradCheckFloor = 1e-6;

// Central differences of `loss` w.r.t. every entry of every block, compared
// with the analytic gradients already stored in the blocks. `loss` must be a
// pure function of the block values. At most `max_per_block` entries per
// block are probed (evenly strided) when nonzero.
GradCheckReport grad_check(std::span<const ParamBlock> blocks, const std::function<double()>& loss,
                           double h = kGradCheckStep, std::size_t max_per_block = 0);

} // namespace mc::ad
