#include "multicut/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "multicut/config.hpp"
#include "multicut/error.hpp"
#include "multicut/exact.hpp"
#include "multicut/io.hpp"

namespace mc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CostRange parse_range(const std::string& text) {
  const auto colon = text.find(':', 1);
  if (colon == std::string::npos) throw InputError("cost range '" + text + "' must read lo:hi");
  CostRange r;
  try {
    r.lo = std::stoll(text.substr(0, colon));
    r.hi = std::stoll(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw InputError("cost range '" + text + "' must read lo:hi");
  }
  if (r.lo > r.hi) throw InputError("cost range '" + text + "' is empty");
  return r;
}

} // namespace

TrainConfig train_config_from(const KeyValues& kv, TrainConfig cfg) {
  if (kv.has("sizes")) {
    cfg.sizes.clear();
    for (const auto& s : kv.get_list("sizes")) {
      const long long n = std::stoll(s);
      if (n < 2) throw InputError("sizes must be >= 2");
      cfg.sizes.push_back(static_cast<std::size_t>(n));
    }
  }
  if (kv.has("ranges")) {
    cfg.ranges.clear();
    for (const auto& r : kv.get_list("ranges")) cfg.ranges.push_back(parse_range(r));
  }
  auto count = [&](const char* key, std::size_t fallback) {
    const long long v = kv.get_int(key, static_cast<long long>(fallback));
    if (v < 0) throw InputError(std::string(key) + " must be non-negative");
    return static_cast<std::size_t>(v);
  };
  cfg.count = count("count", cfg.count);
  cfg.epochs = count("epochs", cfg.epochs);
  cfg.batch_size = count("batch_size", cfg.batch_size);
  cfg.checkpoint_every = count("checkpoint_every", cfg.checkpoint_every);
  cfg.threads = count("threads", cfg.threads);
  cfg.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(cfg.seed)));
  cfg.lr_max = kv.get_double("lr_max", cfg.lr_max);
  cfg.lr_min = kv.get_double("lr_min", cfg.lr_min);
  cfg.augment = kv.get_bool("augment", cfg.augment);
  cfg.label_time_limit = kv.get_double("label_time_limit", cfg.label_time_limit);
  cfg.model = model_config_from(kv.with_prefix("model."), cfg.model);
  if (cfg.epochs < 1) throw InputError("epochs must be >= 1");
  if (cfg.batch_size < 1) throw InputError("batch_size must be >= 1");
  if (cfg.sizes.empty() || cfg.ranges.empty()) throw InputError("sizes and ranges must be non-empty");
  return cfg;
}

TrainConfig load_train_config(const std::string& path) { return train_config_from(KeyValues::load(path)); }

std::uint64_t sample_seed(std::uint64_t base, std::size_t cell, std::size_t k) {
  return splitmix64(splitmix64(base ^ splitmix64(cell + 1)) + k);
}

std::vector<TrainSample> generate_dataset(const TrainConfig& cfg,
                                          const std::function<void(const std::string&)>& log) {
  struct Job {
    std::size_t n;
    CostRange range;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  std::size_t cell = 0;
  for (const auto n : cfg.sizes)
    for (const auto& r : cfg.ranges) {
      for (std::size_t k = 0; k < cfg.count; ++k) jobs.push_back({n, r, sample_seed(cfg.seed, cell, k)});
      ++cell;
    }

  std::vector<std::optional<TrainSample>> slots(jobs.size());
  std::vector<std::string> skipped(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      const auto& job = jobs[j];
      const auto ci = complete(generate_random(job.n, job.range.lo, job.range.hi, job.seed));
      auto r = branch_and_bound(ci, cfg.label_time_limit);
      if (!r.proven_optimal) {
        skipped[j] = "skipped sample seed=" + std::to_string(job.seed) + " n=" + std::to_string(job.n) +
                     ": exact solve timed out";
        continue;
      }
      slots[j] = TrainSample{normalize(ci), std::move(r.labeling), {job.seed, job.n, job.range, 0}};
    }
  };
  const std::size_t threads =
      std::max<std::size_t>(1, cfg.threads ? cfg.threads : std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::vector<TrainSample> out;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (slots[j]) out.push_back(std::move(*slots[j]));
    else if (log) log(skipped[j]);
  }
  return out;
}

TrainSample augment_by_contraction(const TrainSample& s, std::mt19937_64& rng) {
  const std::size_t n = s.instance.node_count();
  std::vector<std::pair<Node, Node>> joined;
  for (std::size_t i = 0, p = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++p)
      if (!s.target[p]) joined.emplace_back(static_cast<Node>(i), static_cast<Node>(j));
  if (joined.empty()) return s;

  const auto [a, b] = joined[std::uniform_int_distribution<std::size_t>(0, joined.size() - 1)(rng)];
  for (std::size_t k = 0; k < n; ++k)
    if (k != a && k != b && s.target[pair_index(n, k, a)] != s.target[pair_index(n, k, b)])
      throw ContractViolation("target is not a multicut: merged pairs disagree");

  auto [contracted, rec] = contract(s.instance, a, b);
  const std::size_t m = contracted.node_count();
  std::vector<Node> old_of(m);
  for (std::size_t old = 0; old < n; ++old)
    if (old != b) old_of[rec.old_to_new[old]] = static_cast<Node>(old);

  EdgeLabeling target(pair_count(m));
  for (std::size_t i = 0, p = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j, ++p) target[p] = s.target[pair_index(n, old_of[i], old_of[j])];

  TrainSample out{normalize(contracted), std::move(target), s.origin};
  ++out.origin.depth;
  return out;
}

TrainSample augment_random_depth(const TrainSample& s, std::mt19937_64& rng) {
  const std::size_t n = s.instance.node_count();
  if (n < 4) return s;
  const std::size_t depth = std::uniform_int_distribution<std::size_t>(0, n - 3)(rng);
  TrainSample cur = s;
  for (std::size_t d = 0; d < depth; ++d) {
    const std::size_t before = cur.instance.node_count();
    cur = augment_by_contraction(cur, rng);
    if (cur.instance.node_count() == before) break;
  }
  return cur;
}

std::vector<std::uint8_t> join_targets(const EdgeLabeling& target) {
  std::vector<std::uint8_t> t(target.size());
  for (std::size_t p = 0; p < t.size(); ++p) t[p] = !target[p];
  return t;
}

double evaluate_loss(const TmpModel& model, const std::vector<TrainSample>& data) {
  double total = 0.0;
  for (const auto& s : data) total += ad::bce_with_logits(model.logits(s.instance), join_targets(s.target));
  return data.empty() ? 0.0 : total / static_cast<double>(data.size());
}

TrainOutput train(TmpModel& model, const std::vector<TrainSample>& data, const TrainConfig& cfg,
                  const TrainHooks& hooks, TrainState state) {
  if (data.empty()) throw InputError("training needs a non-empty dataset");
  if (cfg.epochs < 1 || cfg.batch_size < 1) throw InputError("epochs and batch_size must be >= 1");

  TrainOutput out;
  auto params = model.parameters();
  std::vector<std::size_t> order(data.size());
  std::vector<double> dlogits;

  for (std::size_t epoch = state.next_epoch; epoch < cfg.epochs; ++epoch) {
    // The shuffle and augmentation stream depends only on (seed, epoch), so
    // a resumed run continues exactly where it stopped.
    std::mt19937_64 rng(sample_seed(cfg.seed, std::numeric_limits<std::size_t>::max(), epoch));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = ad::cosine_lr(epoch, cfg.epochs, cfg.lr_max, cfg.lr_min);

    double loss_sum = 0.0;
    std::size_t in_batch = 0;
    std::size_t counted = 0;
    auto flush = [&] {
      if (in_batch == 0) return;
      if (in_batch > 1) {
        const double scale = 1.0 / static_cast<double>(in_batch);
        for (auto& b : params)
          for (auto& g : b.grad) g *= scale;
      }
      ad::adam_step(params, state.adam, lr);
      model.zero_grad();
      in_batch = 0;
    };

    model.zero_grad();
    for (const auto idx : order) {
      const TrainSample sample = cfg.augment ? augment_random_depth(data[idx], rng) : data[idx];
      if (sample.instance.node_count() < 3) continue; // no learnable path
      TmpModel::Tape tape;
      double loss = std::numeric_limits<double>::quiet_NaN();
      try {
        const auto z = model.forward(sample.instance, &tape);
        loss = ad::bce_with_logits(z, join_targets(sample.target), &dlogits);
      } catch (const NumericError&) {
      }
      if (!std::isfinite(loss)) {
        if (hooks.diverged) hooks.diverged(model);
        throw NumericError("non-finite training loss in epoch " + std::to_string(epoch));
      }
      model.backward(tape, dlogits);
      loss_sum += loss;
      ++counted;
      if (++in_batch == cfg.batch_size) flush();
    }
    flush();

    EpochStats st{epoch, counted ? loss_sum / static_cast<double>(counted) : 0.0, lr};
    out.curve.push_back(st);
    state.next_epoch = epoch + 1;
    if (hooks.epoch_done) hooks.epoch_done(st);
    if (hooks.checkpoint && cfg.checkpoint_every && (epoch + 1) % cfg.checkpoint_every == 0 && epoch + 1 < cfg.epochs)
      hooks.checkpoint(model, state);
  }
  if (hooks.checkpoint) hooks.checkpoint(model, state);
  out.state = std::move(state);
  return out;
}

void write_loss_curve(std::ostream& os, const std::vector<EpochStats>& curve) {
  os << "epoch,mean_loss,lr\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& e : curve) os << e.epoch << ',' << e.mean_loss << ',' << e.lr << '\n';
}

namespace fs = std::filesystem;

void write_dataset(const std::string& dir, const std::vector<TrainSample>& data, const TrainConfig& cfg) {
  fs::create_directories(dir);
  std::ofstream rec(fs::path(dir) / "samples.txt");
  std::ofstream man(fs::path(dir) / "manifest.txt");
  if (!rec || !man) throw IoError("cannot write dataset into '" + dir + "'");
  rec << std::setprecision(std::numeric_limits<double>::max_digits10);
  man << "# one line per record: index seed n lo hi depth\n";
  man << "# base seed " << cfg.seed << ", " << data.size() << " records\n";
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto& s = data[k];
    const Instance inst = s.instance.to_instance();
    write_instance(rec, inst);
    rec << "labels";
    for (auto b : s.target) rec << ' ' << int(b);
    rec << '\n';
    man << k << ' ' << s.origin.seed << ' ' << s.origin.n << ' ' << s.origin.range.lo << ' ' << s.origin.range.hi << ' '
        << s.origin.depth << '\n';
  }
  if (!rec || !man) throw IoError("write failed for dataset '" + dir + "'");
}

std::vector<TrainSample> read_dataset(const std::string& dir) {
  std::ifstream rec(fs::path(dir) / "samples.txt");
  std::ifstream man(fs::path(dir) / "manifest.txt");
  if (!rec || !man) throw IoError("cannot open dataset '" + dir + "'");

  std::vector<SampleOrigin> origins;
  for (std::string line; std::getline(man, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::size_t k;
    SampleOrigin o;
    if (!(ss >> k >> o.seed >> o.n >> o.range.lo >> o.range.hi >> o.depth)) throw IoError("bad manifest line: " + line);
    origins.push_back(o);
  }

  std::vector<TrainSample> out;
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(rec, line)) {
      ++line_no;
      if (!line.empty()) return true;
    }
    return false;
  };
  while (next_line()) {
    std::istringstream head(line);
    std::size_t n, m;
    if (!(head >> n >> m)) throw ParseError("expected record header \"n m\"", line_no);
    std::ostringstream body;
    body << line << '\n';
    for (std::size_t e = 0; e < m; ++e) {
      if (!next_line()) throw ParseError("record truncated", line_no);
      body << line << '\n';
    }
    std::istringstream bs(body.str());
    const Instance inst = parse_instance(bs, InstanceFormat::Edgelist);
    if (!inst.is_complete()) throw ParseError("training records must be complete graphs", line_no);
    if (!next_line()) throw ParseError("missing labels line", line_no);
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag != "labels") throw ParseError("expected labels line", line_no);
    std::vector<std::uint8_t> labels;
    for (int b; ls >> b;) {
      if (b != 0 && b != 1) throw ParseError("labels must be 0 or 1", line_no);
      labels.push_back(static_cast<std::uint8_t>(b));
    }
    if (labels.size() != m) throw ParseError("label count differs from edge count", line_no);
    auto ci = complete(inst);
    ci.set_normalized(true);
    const SampleOrigin o = out.size() < origins.size() ? origins[out.size()] : SampleOrigin{};
    out.push_back({std::move(ci), EdgeLabeling(std::move(labels)), o});
  }
  return out;
}

} // namespace mc
