#pragma once

#include <cstdint>
#include <string>

#include "multicut/autodiff.hpp"
#include "multicut/tmp.hpp"

namespace mc {

// Binary model file, little endian: magic "MCTMP1", u32 count of linear
// stages, each as u32 in, u32 out, weights (out x in, row-major f64) and
// biases; then u32 count of layer norms, each as u32 dim, gains, shifts.
// The "<path>.manifest" sidecar holds the model config, shapes and an FNV-1a
// checksum of the binary file, and is needed to load it.
void save_model(const std::string& path, TmpModel& model);
// Throws IoError on a missing file or manifest, bad magic, shape mismatch or
// checksum mismatch.
TmpModel load_model(const std::string& path);

// Adam moments and step counter for resuming a run, plus the next epoch.
void save_optimizer(const std::string& path, const ad::AdamState& state, std::uint64_t next_epoch);
ad::AdamState load_optimizer(const std::string& path, std::uint64_t* next_epoch = nullptr);

std::uint64_t fnv1a64(const std::string& bytes);

} // namespace mc
