#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "multicut/autodiff.hpp"
#include "multicut/core.hpp"
#include "multicut/tmp.hpp"

namespace mc {

class KeyValues;

struct CostRange {
  long long lo = -5;
  long long hi = 5;
  friend bool operator==(const CostRange&, const CostRange&) = default;
};

struct TrainConfig {
  std::vector<std::size_t> sizes{6, 8, 10, 12};
  std::vector<CostRange> ranges{{-5, 5}};
  std::size_t count = 500; // instances per (size, range) cell
  std::size_t epochs = 100;
  double lr_max = 1e-4;
  double lr_min = 0.0;
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;
  bool augment = true;
  double label_time_limit = 10.0; // seconds per exact solve
  std::size_t checkpoint_every = 0; // epochs; 0 = never
  std::size_t threads = 0;          // dataset generation; 0 = hardware
  ModelConfig model = ModelConfig::small();

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Keys: sizes, ranges (e.g. "-5:5,-1:1"), count, epochs, lr_max, lr_min,
// batch_size, seed, augment, label_time_limit, checkpoint_every, threads and
// model.* for the model config.
TrainConfig train_config_from(const KeyValues& kv, TrainConfig base = {});
TrainConfig load_train_config(const std::string& path);

struct SampleOrigin {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  CostRange range;
  std::size_t depth = 0; // contractions applied
};

struct TrainSample {
  CompleteInstance instance; // normalized
  EdgeLabeling target;       // optimal labeling over the pairs of instance
  SampleOrigin origin;
};

// Per-sample seed of cell c, instance k.
std::uint64_t sample_seed(std::uint64_t base, std::size_t cell, std::size_t k);

// Random instances labeled by branch-and-bound. Samples whose exact solve
// times out are skipped and reported through log. Same (cfg) -> same data,
// whatever the thread count.
std::vector<TrainSample> generate_dataset(const TrainConfig& cfg,
                                          const std::function<void(const std::string&)>& log = {});

// Contracts one uniformly chosen joined pair; the merged target rows agree by
// feasibility (checked, ContractViolation otherwise). Unchanged when every
// pair is cut.
TrainSample augment_by_contraction(const TrainSample& s, std::mt19937_64& rng);
// Applies a depth drawn uniformly from [0, n-3].
TrainSample augment_random_depth(const TrainSample& s, std::mt19937_64& rng);

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double lr = 0.0;
};

struct TrainState {
  ad::AdamState adam;
  std::size_t next_epoch = 0;
};

struct TrainOutput {
  std::vector<EpochStats> curve;
  TrainState state;
};

struct TrainHooks {
  // Called every cfg.checkpoint_every epochs and once at the end.
  std::function<void(TmpModel&, const TrainState&)> checkpoint;
  // Called before aborting on a non-finite loss.
  std::function<void(TmpModel&)> diverged;
  std::function<void(const EpochStats&)> epoch_done;
};

// Shuffled per epoch, BCE loss, Adam at the cosine rate of the epoch, batch
// gradients averaged. Throws NumericError on a non-finite loss.
TrainOutput train(TmpModel& model, const std::vector<TrainSample>& data, const TrainConfig& cfg,
                  const TrainHooks& hooks = {}, TrainState state = {});

// Mean BCE of the model over data without updates.
// Positive logits propose contractions, so the loss sees 1 for joined pairs.
std::vector<std::uint8_t> join_targets(const EdgeLabeling& target);

double evaluate_loss(const TmpModel& model, const std::vector<TrainSample>& data);

void write_loss_curve(std::ostream& os, const std::vector<EpochStats>& curve);

// Records of "n m", m lines "i j c" and "labels b1 .. bm"; the manifest
// lists the provenance of every record.
void write_dataset(const std::string& dir, const std::vector<TrainSample>& data, const TrainConfig& cfg);
std::vector<TrainSample> read_dataset(const std::string& dir);

} // namespace mc
