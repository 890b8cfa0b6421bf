#pragma once

// Triangle message passing network on edge features of K_n.
//
// One layer maps features h (one vector per pair) to h' by
//   m_ijk = M(h_ij, h_ik + h_jk, |h_ik - h_jk|)
//   m_ij  = mean over k of m_ijk
//   h'_ij = U(h_ij, m_ij)
// followed by the residual add and layer norm on intermediate layers. The
// model stacks an embedding layer (1 -> width), hidden layers and an output
// layer (width -> 1, no activation after U) and reads the output as logits.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "multicut/autodiff.hpp"
#include "multicut/core.hpp"

namespace mc {

enum class MessageScheme { Triangle, Edge };

struct ModelConfig {
  std::size_t layers = 20; // including embedding and output layer
  std::size_t width = 64;
  std::size_t mlp_hidden_layers = 0; // extra width x width stages inside M and U
  bool layer_norm = true;        // on intermediate layers
  bool embed_layer_norm = false; // also on the embedding layer
  bool layer_norm_affine = true;
  bool residual = true;
  MessageScheme message_scheme = MessageScheme::Triangle;

  static ModelConfig full_size() { return {}; }
  // 4 layers of width 16; the configuration trained at desk scale.
  static ModelConfig small() {
    ModelConfig c;
    c.layers = 4;
    c.width = 16;
    return c;
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

class KeyValues;
// Reads layers, width, mlp_hidden_layers, layer_norm, embed_layer_norm,
// layer_norm_affine,
// residual and message_scheme (triangle|edge); missing keys keep defaults.
ModelConfig model_config_from(const KeyValues& kv, ModelConfig base = {});
ModelConfig load_model_config(const std::string& path);
std::string to_text(const ModelConfig& cfg);

// One feature vector per pair of K_n, rows in lexicographic pair order.
class EdgeFeatureField {
public:
  EdgeFeatureField() = default;
  EdgeFeatureField(std::size_t n, std::size_t width) : n_(n), data_(pair_count(n), width) {}
  EdgeFeatureField(std::size_t n, ad::Tensor2 data);

  std::size_t node_count() const noexcept { return n_; }
  std::size_t width() const noexcept { return data_.cols(); }
  std::span<double> at(std::size_t i, std::size_t j) { return data_.row(pair_index(n_, i, j)); }
  std::span<const double> at(std::size_t i, std::size_t j) const { return data_.row(pair_index(n_, i, j)); }
  const ad::Tensor2& data() const noexcept { return data_; }
  ad::Tensor2& data() noexcept { return data_; }

private:
  std::size_t n_ = 0;
  ad::Tensor2 data_;
};

struct MlpCache {
  std::vector<ad::Tensor2> inputs; // input of each linear stage
  std::vector<ad::Tensor2> pre;    // pre-activation of each stage
};

// Linear stages with GELU after each, optionally omitted after the last.
struct Mlp {
  Mlp() = default;
  Mlp(std::size_t in, std::size_t hidden, std::size_t out, std::size_t hidden_layers, bool final_activation);

  ad::Tensor2 forward(const ad::Tensor2& x, MlpCache* cache = nullptr) const;
  ad::Tensor2 backward(const MlpCache& cache, const ad::Tensor2& upstream);
  std::size_t parameter_count() const;

  std::vector<ad::LinearLayer> stages;
  bool final_activation = true;
};

struct TmpLayerCache {
  ad::Tensor2 input;
  MlpCache update;
  ad::LayerNormCache norm;
};

class TmpLayer {
public:
  struct Options {
    std::size_t in = 1;
    std::size_t out = 1;
    std::size_t hidden_width = 64;
    std::size_t mlp_hidden_layers = 0;
    bool output_layer = false; // no GELU after U
    bool layer_norm = false;
    bool layer_norm_affine = true;
    bool residual = false; // only honoured when in == out
    MessageScheme scheme = MessageScheme::Triangle;
  };

  TmpLayer() = default;
  explicit TmpLayer(const Options& opt);

  // Throws InputError if n < 3 or the field width differs from in_dim().
  EdgeFeatureField forward(const EdgeFeatureField& field, TmpLayerCache* cache = nullptr) const;
  // Accumulates parameter gradients, returns dL/dinput.
  EdgeFeatureField backward(const TmpLayerCache& cache, const EdgeFeatureField& upstream);

  std::size_t in_dim() const noexcept { return in_; }
  std::size_t out_dim() const noexcept { return out_; }
  bool has_residual() const noexcept { return residual_; }
  MessageScheme scheme() const noexcept { return scheme_; }
  std::size_t parameter_count() const;
  void zero_grad();
  void init(std::mt19937_64& rng);
  void collect(const std::string& prefix, std::vector<ad::ParamBlock>& out);

  Mlp message;
  Mlp update;
  std::optional<ad::LayerNorm> norm;

private:
  ad::Tensor2 aggregate(const ad::Tensor2& h, std::size_t n) const;
  void aggregate_backward(const ad::Tensor2& h, std::size_t n, const ad::Tensor2& dmsg, ad::Tensor2& dh);

  std::size_t in_ = 1;
  std::size_t out_ = 1;
  bool residual_ = false;
  MessageScheme scheme_ = MessageScheme::Triangle;
};

// Anything that scores the pairs of a normalized complete instance.
class LogitModel {
public:
  virtual ~LogitModel() = default;
  // Logits in lexicographic pair order.
  virtual std::vector<double> logits(const CompleteInstance& ci) const = 0;
};

class TmpModel : public LogitModel {
public:
  struct Tape {
    std::size_t n = 0;
    std::vector<TmpLayerCache> layers;
  };

  TmpModel() : TmpModel(ModelConfig::full_size()) {}
  explicit TmpModel(const ModelConfig& cfg, std::uint64_t seed = 0);

  const ModelConfig& config() const noexcept { return cfg_; }
  std::vector<TmpLayer>& layers() noexcept { return layers_; }
  const std::vector<TmpLayer>& layers() const noexcept { return layers_; }

  // Requires ci.normalized() (ContractViolation otherwise). For n < 3 no
  // triangle exists and the logits are the normalized costs themselves.
  std::vector<double> logits(const CompleteInstance& ci) const override;
  std::vector<double> forward(const CompleteInstance& ci, Tape* tape) const;
  void backward(const Tape& tape, std::span<const double> dlogits);

  std::vector<ad::ParamBlock> parameters();
  std::size_t parameter_count() const;
  void zero_grad();

private:
  ModelConfig cfg_;
  std::vector<TmpLayer> layers_;
};

std::size_t count_parameters(const TmpModel& model);

// Per-layer parameter breakdown, one line per layer plus the total.
std::string parameter_breakdown(const TmpModel& model);

} // namespace mc
