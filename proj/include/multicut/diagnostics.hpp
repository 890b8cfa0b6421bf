#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "multicut/autodiff.hpp"

namespace mc {

struct GradCheckCase {
  std::string name;
  ad::GradCheckReport report;
};

// Finite-difference checks of every differentiable kernel (linear, GELU,
// layer norm with and without affine, BCE, MLP, both message schemes, the
// output layer) and a 2-layer width-4 model on n = 5 end to end. Inputs are
// checked alongside parameters.
std::vector<GradCheckCase> run_gradcheck_suite(std::uint64_t seed = 1);

} // namespace mc
