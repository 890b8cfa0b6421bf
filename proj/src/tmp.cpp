#include "multicut/tmp.hpp"

#include <cmath>
#include <sstream>

#include "multicut/config.hpp"
#include "multicut/error.hpp"

namespace mc {

using ad::Tensor2;

ModelConfig model_config_from(const KeyValues& kv, ModelConfig base) {
  auto non_negative = [&](const char* key, std::size_t fallback) {
    const long long v = kv.get_int(key, static_cast<long long>(fallback));
    if (v < 0) throw InputError(std::string(key) + " must be non-negative");
    return static_cast<std::size_t>(v);
  };
  base.layers = non_negative("layers", base.layers);
  base.width = non_negative("width", base.width);
  base.mlp_hidden_layers = non_negative("mlp_hidden_layers", base.mlp_hidden_layers);
  base.layer_norm = kv.get_bool("layer_norm", base.layer_norm);
  base.embed_layer_norm = kv.get_bool("embed_layer_norm", base.embed_layer_norm);
  base.layer_norm_affine = kv.get_bool("layer_norm_affine", base.layer_norm_affine);
  base.residual = kv.get_bool("residual", base.residual);
  const auto scheme = kv.get("message_scheme", base.message_scheme == MessageScheme::Triangle ? "triangle" : "edge");
  if (scheme == "triangle")
    base.message_scheme = MessageScheme::Triangle;
  else if (scheme == "edge")
    base.message_scheme = MessageScheme::Edge;
  else
    throw InputError("message_scheme must be triangle or edge, got '" + scheme + "'");
  return base;
}

ModelConfig load_model_config(const std::string& path) { return model_config_from(KeyValues::load(path)); }

std::string to_text(const ModelConfig& cfg) {
  std::ostringstream os;
  os << "layers=" << cfg.layers << '\n'
     << "width=" << cfg.width << '\n'
     << "mlp_hidden_layers=" << cfg.mlp_hidden_layers << '\n'
     << "layer_norm=" << (cfg.layer_norm ? "on" : "off") << '\n'
     << "embed_layer_norm=" << (cfg.embed_layer_norm ? "on" : "off") << '\n'
     << "layer_norm_affine=" << (cfg.layer_norm_affine ? "on" : "off") << '\n'
     << "residual=" << (cfg.residual ? "on" : "off") << '\n'
     << "message_scheme=" << (cfg.message_scheme == MessageScheme::Triangle ? "triangle" : "edge") << '\n';
  return os.str();
}

EdgeFeatureField::EdgeFeatureField(std::size_t n, ad::Tensor2 data) : n_(n), data_(std::move(data)) {
  if (data_.rows() != pair_count(n)) throw InputError("feature rows do not match the pair count");
}

Mlp::Mlp(std::size_t in, std::size_t hidden, std::size_t out, std::size_t hidden_layers, bool final_activation)
    : final_activation(final_activation) {
  if (hidden_layers == 0) {
    stages.emplace_back(in, out);
    return;
  }
  stages.emplace_back(in, hidden);
  for (std::size_t t = 1; t < hidden_layers; ++t) stages.emplace_back(hidden, hidden);
  stages.emplace_back(hidden, out);
}

Tensor2 Mlp::forward(const Tensor2& x, MlpCache* cache) const {
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Tensor2 cur = x;
  for (std::size_t t = 0; t < stages.size(); ++t) {
    Tensor2 pre = ad::linear_forward(stages[t], cur);
    const bool activate = t + 1 < stages.size() || final_activation;
    Tensor2 next = activate ? ad::gelu(pre) : pre;
    if (cache) {
      cache->inputs.push_back(std::move(cur));
      cache->pre.push_back(std::move(pre));
    }
    cur = std::move(next);
  }
  return cur;
}

Tensor2 Mlp::backward(const MlpCache& cache, const Tensor2& upstream) {
  Tensor2 g = upstream;
  for (std::size_t t = stages.size(); t-- > 0;) {
    const bool activate = t + 1 < stages.size() || final_activation;
    if (activate) g = ad::gelu_backward(cache.pre[t], g);
    g = ad::linear_backward(stages[t], cache.inputs[t], g);
  }
  return g;
}

std::size_t Mlp::parameter_count() const {
  std::size_t c = 0;
  for (const auto& s : stages) c += s.parameter_count();
  return c;
}

TmpLayer::TmpLayer(const Options& opt)
    : in_(opt.in), out_(opt.out), residual_(opt.residual && opt.in == opt.out), scheme_(opt.scheme) {
  const std::size_t blocks = opt.scheme == MessageScheme::Triangle ? 3 : 2;
  message = Mlp(blocks * opt.in, opt.hidden_width, opt.in, opt.mlp_hidden_layers, true);
  update = Mlp(2 * opt.in, opt.hidden_width, opt.out, opt.mlp_hidden_layers, !opt.output_layer);
  if (opt.layer_norm) norm.emplace(opt.out, opt.layer_norm_affine);
}

std::size_t TmpLayer::parameter_count() const {
  return message.parameter_count() + update.parameter_count() + (norm ? norm->parameter_count() : 0);
}

void TmpLayer::zero_grad() {
  for (auto& s : message.stages) s.zero_grad();
  for (auto& s : update.stages) s.zero_grad();
  if (norm) norm->zero_grad();
}

void TmpLayer::init(std::mt19937_64& rng) {
  for (auto& s : message.stages) s.init_uniform(rng);
  for (auto& s : update.stages) s.init_uniform(rng);
}

void TmpLayer::collect(const std::string& prefix, std::vector<ad::ParamBlock>& out) {
  auto add_mlp = [&](const std::string& name, Mlp& mlp) {
    for (std::size_t t = 0; t < mlp.stages.size(); ++t) {
      auto& s = mlp.stages[t];
      const std::string base = prefix + "." + name + "." + std::to_string(t);
      out.push_back({base + ".weight", s.weight.flat(), s.weight_grad.flat()});
      out.push_back({base + ".bias", s.bias, s.bias_grad});
    }
  };
  add_mlp("message", message);
  add_mlp("update", update);
  if (norm && norm->affine) {
    out.push_back({prefix + ".norm.gain", norm->gain, norm->gain_grad});
    out.push_back({prefix + ".norm.shift", norm->shift, norm->shift_grad});
  }
}

namespace {

// Column block b (width `in`) of a stage weight as its own matrix.
Tensor2 weight_block(const ad::LinearLayer& stage, std::size_t b, std::size_t in) {
  Tensor2 w(stage.out_dim(), in);
  for (std::size_t o = 0; o < stage.out_dim(); ++o)
    for (std::size_t c = 0; c < in; ++c) w(o, c) = stage.weight(o, b * in + c);
  return w;
}

void add_weight_block(ad::LinearLayer& stage, std::size_t b, std::size_t in, const Tensor2& dw) {
  for (std::size_t o = 0; o < stage.out_dim(); ++o)
    for (std::size_t c = 0; c < in; ++c) stage.weight_grad(o, b * in + c) += dw(o, c);
}

// Evaluates the part of M after its first affine stage for one message, and
// its backward pass. Buffers are reused across messages.
class MessageTail {
public:
  explicit MessageTail(const Mlp& mlp) : mlp_(mlp), pre_(mlp.stages.size()), act_(mlp.stages.size()) {
    for (std::size_t t = 0; t < mlp.stages.size(); ++t) {
      pre_[t].resize(mlp.stages[t].out_dim());
      act_[t].resize(mlp.stages[t].out_dim());
    }
  }

  std::vector<double>& first_pre() { return pre_[0]; }

  // Completes the forward pass from first_pre(); returns the message.
  std::span<const double> run() {
    for (std::size_t t = 0; t < pre_.size(); ++t) {
      if (t > 0) {
        const auto& s = mlp_.stages[t];
        std::copy(s.bias.begin(), s.bias.end(), pre_[t].begin());
        ad::matvec_accumulate(s.weight, act_[t - 1], pre_[t]);
      }
      for (std::size_t o = 0; o < pre_[t].size(); ++o) act_[t][o] = ad::gelu(pre_[t][o]);
    }
    return act_.back();
  }

  // After run(): turns dL/dmessage into dL/dfirst_pre, accumulating the
  // gradients of stages 1.. into `grads`.
  void backward(std::span<const double> g_message, Mlp& grads, std::vector<double>& g_first) {
    g_.assign(g_message.begin(), g_message.end());
    for (std::size_t t = pre_.size(); t-- > 0;) {
      gpre_.resize(pre_[t].size());
      for (std::size_t o = 0; o < gpre_.size(); ++o) gpre_[o] = g_[o] * ad::gelu_derivative(pre_[t][o]);
      if (t == 0) break;
      auto& s = grads.stages[t];
      ad::outer_accumulate(s.weight_grad, gpre_, act_[t - 1]);
      for (std::size_t o = 0; o < gpre_.size(); ++o) s.bias_grad[o] += gpre_[o];
      g_.assign(s.in_dim(), 0.0);
      ad::matvec_transposed_accumulate(s.weight, gpre_, g_);
    }
    g_first = gpre_;
  }

private:
  const Mlp& mlp_;
  std::vector<std::vector<double>> pre_;
  std::vector<std::vector<double>> act_;
  std::vector<double> g_;
  std::vector<double> gpre_;
};

} // namespace

// Mean of the messages received by every pair. The first affine stage of M is
// split by input block: the h_ij block and the shared-edge block are applied
// once per pair, only the |h_ik - h_jk| block (triangle scheme) is applied per
// message. Persistent memory stays O(pairs x width).
Tensor2 TmpLayer::aggregate(const Tensor2& h, std::size_t n) const {
  const std::size_t a = in_;
  const std::size_t pairs = h.rows();
  const auto& first = message.stages[0];
  const std::size_t o0 = first.out_dim();
  const bool triangle = scheme_ == MessageScheme::Triangle;

  const Tensor2 w_self = weight_block(first, 0, a);
  const Tensor2 w_side = weight_block(first, 1, a);
  const Tensor2 w_diff = triangle ? weight_block(first, 2, a) : Tensor2{};

  Tensor2 base(pairs, o0), side(pairs, o0);
  for (std::size_t p = 0; p < pairs; ++p) {
    auto b = base.row(p);
    std::copy(first.bias.begin(), first.bias.end(), b.begin());
    ad::matvec_accumulate(w_self, h.row(p), b);
    ad::matvec_accumulate(w_side, h.row(p), side.row(p));
  }

  Tensor2 msg(pairs, a);
  MessageTail tail(message);
  auto& pre = tail.first_pre();
  std::vector<double> diff(a);
  const double inv_count = 1.0 / static_cast<double>(triangle ? n - 2 : 2 * (n - 2));

  for (std::size_t i = 0, p = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++p) {
      auto out = msg.row(p);
      const auto bp = base.row(p);
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        const std::size_t e1 = pair_index(n, i, k);
        const std::size_t e2 = pair_index(n, j, k);
        if (triangle) {
          const auto s1 = side.row(e1), s2 = side.row(e2);
          for (std::size_t o = 0; o < o0; ++o) pre[o] = bp[o] + s1[o] + s2[o];
          const auto h1 = h.row(e1), h2 = h.row(e2);
          for (std::size_t c = 0; c < a; ++c) diff[c] = std::abs(h1[c] - h2[c]);
          ad::matvec_accumulate(w_diff, diff, pre);
          const auto m = tail.run();
          for (std::size_t c = 0; c < a; ++c) out[c] += m[c];
        } else {
          for (std::size_t e : {e1, e2}) {
            const auto s = side.row(e);
            for (std::size_t o = 0; o < o0; ++o) pre[o] = bp[o] + s[o];
            const auto m = tail.run();
            for (std::size_t c = 0; c < a; ++c) out[c] += m[c];
          }
        }
      }
      for (double& v : out) v *= inv_count;
    }
  return msg;
}

void TmpLayer::aggregate_backward(const Tensor2& h, std::size_t n, const Tensor2& dmsg, Tensor2& dh) {
  const std::size_t a = in_;
  const std::size_t pairs = h.rows();
  auto& first = message.stages[0];
  const std::size_t o0 = first.out_dim();
  const bool triangle = scheme_ == MessageScheme::Triangle;

  const Tensor2 w_self = weight_block(first, 0, a);
  const Tensor2 w_side = weight_block(first, 1, a);
  const Tensor2 w_diff = triangle ? weight_block(first, 2, a) : Tensor2{};

  Tensor2 base(pairs, o0), side(pairs, o0);
  for (std::size_t p = 0; p < pairs; ++p) {
    auto b = base.row(p);
    std::copy(first.bias.begin(), first.bias.end(), b.begin());
    ad::matvec_accumulate(w_self, h.row(p), b);
    ad::matvec_accumulate(w_side, h.row(p), side.row(p));
  }

  // Gradients w.r.t. the per-pair partial sums base and side.
  Tensor2 g_base(pairs, o0), g_side(pairs, o0);
  Tensor2 dw_diff(o0, a);
  MessageTail tail(message);
  auto& pre = tail.first_pre();
  std::vector<double> diff(a), sign(a), g_msg(a), g_first, back(a);
  const double inv_count = 1.0 / static_cast<double>(triangle ? n - 2 : 2 * (n - 2));

  for (std::size_t i = 0, p = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++p) {
      const auto bp = base.row(p);
      const auto gm = dmsg.row(p);
      for (std::size_t c = 0; c < a; ++c) g_msg[c] = gm[c] * inv_count;
      auto gb = g_base.row(p);
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        const std::size_t e1 = pair_index(n, i, k);
        const std::size_t e2 = pair_index(n, j, k);
        if (triangle) {
          const auto s1 = side.row(e1), s2 = side.row(e2);
          for (std::size_t o = 0; o < o0; ++o) pre[o] = bp[o] + s1[o] + s2[o];
          const auto h1 = h.row(e1), h2 = h.row(e2);
          for (std::size_t c = 0; c < a; ++c) {
            const double d = h1[c] - h2[c];
            diff[c] = std::abs(d);
            sign[c] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
          }
          ad::matvec_accumulate(w_diff, diff, pre);
          tail.run();
          tail.backward(g_msg, message, g_first);
          auto gs1 = g_side.row(e1), gs2 = g_side.row(e2);
          for (std::size_t o = 0; o < o0; ++o) {
            gb[o] += g_first[o];
            gs1[o] += g_first[o];
            gs2[o] += g_first[o];
          }
          ad::outer_accumulate(dw_diff, g_first, diff);
          std::fill(back.begin(), back.end(), 0.0);
          ad::matvec_transposed_accumulate(w_diff, g_first, back);
          auto d1 = dh.row(e1), d2 = dh.row(e2);
          for (std::size_t c = 0; c < a; ++c) {
            d1[c] += back[c] * sign[c];
            d2[c] -= back[c] * sign[c];
          }
        } else {
          for (std::size_t e : {e1, e2}) {
            const auto s = side.row(e);
            for (std::size_t o = 0; o < o0; ++o) pre[o] = bp[o] + s[o];
            tail.run();
            tail.backward(g_msg, message, g_first);
            auto gs = g_side.row(e);
            for (std::size_t o = 0; o < o0; ++o) {
              gb[o] += g_first[o];
              gs[o] += g_first[o];
            }
          }
        }
      }
    }

  Tensor2 dw_self(o0, a), dw_side(o0, a);
  for (std::size_t p = 0; p < pairs; ++p) {
    const auto gb = g_base.row(p);
    const auto gs = g_side.row(p);
    ad::outer_accumulate(dw_self, gb, h.row(p));
    ad::outer_accumulate(dw_side, gs, h.row(p));
    for (std::size_t o = 0; o < o0; ++o) first.bias_grad[o] += gb[o];
    ad::matvec_transposed_accumulate(w_self, gb, dh.row(p));
    ad::matvec_transposed_accumulate(w_side, gs, dh.row(p));
  }
  add_weight_block(first, 0, a, dw_self);
  add_weight_block(first, 1, a, dw_side);
  if (triangle) add_weight_block(first, 2, a, dw_diff);
}

EdgeFeatureField TmpLayer::forward(const EdgeFeatureField& field, TmpLayerCache* cache) const {
  const std::size_t n = field.node_count();
  if (n < 3) throw InputError("message passing needs at least 3 nodes");
  if (field.width() != in_)
    throw InputError("layer expects width " + std::to_string(in_) + ", got " + std::to_string(field.width()));
  const Tensor2& h = field.data();
  const std::size_t pairs = h.rows();
  const Tensor2 msg = aggregate(h, n);

  Tensor2 uin(pairs, 2 * in_);
  for (std::size_t p = 0; p < pairs; ++p) {
    auto row = uin.row(p);
    const auto hp = h.row(p), mp = msg.row(p);
    std::copy(hp.begin(), hp.end(), row.begin());
    std::copy(mp.begin(), mp.end(), row.begin() + static_cast<std::ptrdiff_t>(in_));
  }
  Tensor2 y = update.forward(uin, cache ? &cache->update : nullptr);
  if (residual_) {
    auto yf = y.flat();
    const auto hf = h.flat();
    for (std::size_t k = 0; k < yf.size(); ++k) yf[k] += hf[k];
  }
  if (norm) y = ad::layer_norm_forward(*norm, y, cache ? &cache->norm : nullptr);
  if (cache) cache->input = h;
  return EdgeFeatureField(n, std::move(y));
}

EdgeFeatureField TmpLayer::backward(const TmpLayerCache& cache, const EdgeFeatureField& upstream) {
  const std::size_t n = upstream.node_count();
  const Tensor2& h = cache.input;
  const std::size_t pairs = h.rows();
  Tensor2 dy = norm ? ad::layer_norm_backward(*norm, cache.norm, upstream.data()) : upstream.data();

  Tensor2 dh = residual_ ? dy : Tensor2(pairs, in_);
  const Tensor2 duin = update.backward(cache.update, dy);
  Tensor2 dmsg(pairs, in_);
  for (std::size_t p = 0; p < pairs; ++p) {
    const auto g = duin.row(p);
    auto d = dh.row(p);
    auto dm = dmsg.row(p);
    for (std::size_t c = 0; c < in_; ++c) {
      d[c] += g[c];
      dm[c] = g[in_ + c];
    }
  }
  aggregate_backward(h, n, dmsg, dh);
  return EdgeFeatureField(n, std::move(dh));
}

TmpModel::TmpModel(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg.layers < 2) throw InputError("model needs at least an embedding and an output layer");
  if (cfg.width < 1) throw InputError("width must be positive");
  if ((cfg.layer_norm || cfg.embed_layer_norm) && cfg.width < 2) throw InputError("layer norm needs width >= 2");
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    TmpLayer::Options opt;
    const bool first = l == 0;
    const bool last = l + 1 == cfg.layers;
    opt.in = first ? 1 : cfg.width;
    opt.out = last ? 1 : cfg.width;
    opt.hidden_width = cfg.width;
    opt.mlp_hidden_layers = cfg.mlp_hidden_layers;
    opt.output_layer = last;
    opt.layer_norm = !last && (first ? cfg.embed_layer_norm : cfg.layer_norm);
    opt.layer_norm_affine = cfg.layer_norm_affine;
    opt.residual = cfg.residual && !first && !last;
    opt.scheme = cfg.message_scheme;
    layers_.emplace_back(opt);
  }
  std::mt19937_64 rng(seed);
  for (auto& layer : layers_) layer.init(rng);
}

std::vector<double> TmpModel::logits(const CompleteInstance& ci) const { return forward(ci, nullptr); }

std::vector<double> TmpModel::forward(const CompleteInstance& ci, Tape* tape) const {
  if (!ci.normalized()) throw ContractViolation("model input must be a normalized complete instance");
  const std::size_t n = ci.node_count();
  auto costs = ci.costs();
  if (tape) {
    tape->n = n;
    tape->layers.clear();
  }
  if (n < 3) return costs;

  Tensor2 h0(costs.size(), 1);
  for (std::size_t p = 0; p < costs.size(); ++p) h0(p, 0) = costs[p];
  EdgeFeatureField field(n, std::move(h0));
  if (tape) tape->layers.resize(layers_.size());
  for (std::size_t l = 0; l < layers_.size(); ++l)
    field = layers_[l].forward(field, tape ? &tape->layers[l] : nullptr);

  std::vector<double> out(field.data().flat().begin(), field.data().flat().end());
  ad::require_finite(out, "logits");
  return out;
}

void TmpModel::backward(const Tape& tape, std::span<const double> dlogits) {
  if (tape.n < 3) return;
  if (tape.layers.size() != layers_.size()) throw InputError("tape does not belong to this model");
  Tensor2 g(dlogits.size(), 1);
  for (std::size_t p = 0; p < dlogits.size(); ++p) g(p, 0) = dlogits[p];
  EdgeFeatureField field(tape.n, std::move(g));
  for (std::size_t l = layers_.size(); l-- > 0;) field = layers_[l].backward(tape.layers[l], field);
}

std::vector<ad::ParamBlock> TmpModel::parameters() {
  std::vector<ad::ParamBlock> out;
  for (std::size_t l = 0; l < layers_.size(); ++l) layers_[l].collect("layer" + std::to_string(l), out);
  return out;
}

std::size_t TmpModel::parameter_count() const {
  std::size_t c = 0;
  for (const auto& l : layers_) c += l.parameter_count();
  return c;
}

void TmpModel::zero_grad() {
  for (auto& l : layers_) l.zero_grad();
}

std::size_t count_parameters(const TmpModel& model) { return model.parameter_count(); }

std::string parameter_breakdown(const TmpModel& model) {
  std::ostringstream os;
  const auto& layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    os << "layer " << l << " (" << layer.in_dim() << "->" << layer.out_dim() << "): message "
       << layer.message.parameter_count() << ", update " << layer.update.parameter_count() << ", norm "
       << (layer.norm ? layer.norm->parameter_count() : 0) << ", total " << layer.parameter_count() << '\n';
  }
  os << "total " << model.parameter_count() << '\n';
  return os.str();
}

} // namespace mc
