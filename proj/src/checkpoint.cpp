#include "multicut/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "multicut/config.hpp"
#include "multicut/error.hpp"

namespace mc {

namespace {

constexpr char kModelMagic[] = "MCTMP1";
constexpr char kAdamMagic[] = "MCADAM1\n";

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
public:
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    bytes_ += s;
  }
  void doubles(std::span<const double> v) {
    u64(v.size());
    raw(v.data(), v.size() * sizeof(double));
  }
  void raw(const void* p, std::size_t n) { bytes_.append(static_cast<const char*>(p), n); }
  const std::string& bytes() const { return bytes_; }

private:
  std::string bytes_;
};

class Reader {
public:
  Reader(std::string bytes, std::string path) : bytes_(std::move(bytes)), path_(std::move(path)) {}

  void raw(void* p, std::size_t n) {
    if (pos_ + n > bytes_.size()) throw IoError("truncated file '" + path_ + "'");
    std::memcpy(p, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, sizeof v);
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, sizeof v);
    return v;
  }
  std::string str() {
    const auto n = u64();
    if (n > bytes_.size() - pos_) throw IoError("truncated file '" + path_ + "'");
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<double> doubles() {
    const auto n = u64();
    if (n > (bytes_.size() - pos_) / sizeof(double)) throw IoError("truncated file '" + path_ + "'");
    std::vector<double> v(n);
    raw(v.data(), n * sizeof(double));
    return v;
  }
  void magic(const char* m) {
    const std::size_t n = std::strlen(m);
    if (bytes_.compare(0, n, m) != 0) throw IoError("'" + path_ + "' is not a recognised file (bad magic)");
    pos_ = n;
  }
  bool done() const { return pos_ == bytes_.size(); }

private:
  std::string bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

} // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

// Every linear stage of the model in file order: per layer, message stages
// then update stages.
std::vector<ad::LinearLayer*> linear_stages(TmpModel& model) {
  std::vector<ad::LinearLayer*> out;
  for (auto& layer : model.layers()) {
    for (auto& s : layer.message.stages) out.push_back(&s);
    for (auto& s : layer.update.stages) out.push_back(&s);
  }
  return out;
}

std::vector<ad::LayerNorm*> norms(TmpModel& model) {
  std::vector<ad::LayerNorm*> out;
  for (auto& layer : model.layers())
    if (layer.norm) out.push_back(&*layer.norm);
  return out;
}

} // namespace

void save_model(const std::string& path, TmpModel& model) {
  Writer w;
  w.raw(kModelMagic, std::strlen(kModelMagic));
  const auto stages = linear_stages(model);
  w.u32(static_cast<std::uint32_t>(stages.size()));
  for (const auto* s : stages) {
    w.u32(static_cast<std::uint32_t>(s->in_dim()));
    w.u32(static_cast<std::uint32_t>(s->out_dim()));
    w.raw(s->weight.flat().data(), s->weight.size() * sizeof(double));
    w.raw(s->bias.data(), s->bias.size() * sizeof(double));
  }
  const auto ns = norms(model);
  w.u32(static_cast<std::uint32_t>(ns.size()));
  for (const auto* n : ns) {
    w.u32(static_cast<std::uint32_t>(n->dim()));
    w.raw(n->gain.data(), n->dim() * sizeof(double));
    w.raw(n->shift.data(), n->dim() * sizeof(double));
  }
  spit(path, w.bytes());

  std::ostringstream m;
  m << "# model checkpoint manifest\n" << to_text(model.config());
  m << "parameters=" << model.parameter_count() << '\n';
  m << "linear_layers=" << stages.size() << '\n';
  for (std::size_t k = 0; k < stages.size(); ++k)
    m << "shape.linear." << k << '=' << stages[k]->out_dim() << 'x' << stages[k]->in_dim() << '\n';
  m << "norm_layers=" << ns.size() << '\n';
  for (std::size_t k = 0; k < ns.size(); ++k) m << "shape.norm." << k << '=' << ns[k]->dim() << '\n';
  m << "checksum=" << hex64(fnv1a64(w.bytes())) << '\n';
  spit(path + ".manifest", m.str());
}

TmpModel load_model(const std::string& path) {
  const std::string bytes = slurp(path);
  if (!std::ifstream(path + ".manifest")) throw IoError("missing manifest '" + path + ".manifest'");
  const auto kv = KeyValues::load(path + ".manifest");
  if (kv.get("checksum", "") != hex64(fnv1a64(bytes))) throw IoError("checksum mismatch for '" + path + "'");

  TmpModel model(model_config_from(kv));
  Reader r(bytes, path);
  r.magic(kModelMagic);
  const auto stages = linear_stages(model);
  if (r.u32() != stages.size()) throw IoError("linear layer count does not match the manifest config in '" + path + "'");
  for (auto* s : stages) {
    const auto in = r.u32();
    const auto out = r.u32();
    if (in != s->in_dim() || out != s->out_dim()) throw IoError("linear layer shape mismatch in '" + path + "'");
    r.raw(s->weight.flat().data(), s->weight.size() * sizeof(double));
    r.raw(s->bias.data(), s->bias.size() * sizeof(double));
  }
  const auto ns = norms(model);
  if (r.u32() != ns.size()) throw IoError("layer norm count does not match the manifest config in '" + path + "'");
  for (auto* n : ns) {
    if (r.u32() != n->dim()) throw IoError("layer norm shape mismatch in '" + path + "'");
    r.raw(n->gain.data(), n->dim() * sizeof(double));
    r.raw(n->shift.data(), n->dim() * sizeof(double));
  }
  if (!r.done()) throw IoError("trailing bytes in '" + path + "'");
  return model;
}

void save_optimizer(const std::string& path, const ad::AdamState& state, std::uint64_t next_epoch) {
  Writer w;
  w.raw(kAdamMagic, std::strlen(kAdamMagic));
  w.u64(next_epoch);
  w.u64(state.step);
  w.f64(state.beta1);
  w.f64(state.beta2);
  w.f64(state.epsilon);
  w.u64(state.first.size());
  for (std::size_t b = 0; b < state.first.size(); ++b) {
    w.doubles(state.first[b]);
    w.doubles(state.second[b]);
  }
  spit(path, w.bytes());
}

ad::AdamState load_optimizer(const std::string& path, std::uint64_t* next_epoch) {
  Reader r(slurp(path), path);
  r.magic(kAdamMagic);
  const auto epoch = r.u64();
  if (next_epoch) *next_epoch = epoch;
  ad::AdamState s;
  s.step = r.u64();
  r.raw(&s.beta1, sizeof(double));
  r.raw(&s.beta2, sizeof(double));
  r.raw(&s.epsilon, sizeof(double));
  const auto blocks = r.u64();
  for (std::uint64_t b = 0; b < blocks; ++b) {
    s.first.push_back(r.doubles());
    s.second.push_back(r.doubles());
  }
  return s;
}

} // namespace mc
