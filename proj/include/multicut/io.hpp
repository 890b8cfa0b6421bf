#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>

#include "multicut/core.hpp"

namespace mc {

enum class InstanceFormat {
  Edgelist,      // "n m", then m lines "i j c"
  LowerTriangle, // n, then row i lists the costs to j < i
};

// Throws InputError for unknown names; accepts "edgelist" and "lt".
InstanceFormat parse_format(const std::string& name);

// '#' starts a comment; whitespace is free-form. negate flips every cost
// (for files that store join rewards). Throws ParseError with a line number.
Instance parse_instance(std::istream& in, InstanceFormat format, bool negate = false);
Instance parse_instance(const std::string& path, InstanceFormat format, bool negate = false);

// Lower-triangle output requires a complete instance.
void write_instance(std::ostream& out, const Instance& inst, InstanceFormat format = InstanceFormat::Edgelist);
void write_instance(const std::string& path, const Instance& inst, InstanceFormat format = InstanceFormat::Edgelist);

// K_n with i.i.d. uniform integer costs in [lo, hi]; a pure function of the
// arguments on every platform.
Instance generate_random(std::size_t n, long long lo, long long hi, std::uint64_t seed);

// Uniform integer in [lo, hi] from a 64-bit engine by rejection, independent
// of the standard library's distribution implementation.
template <class Engine>
long long uniform_int(Engine& rng, long long lo, long long hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  if (span == std::numeric_limits<std::uint64_t>::max()) return static_cast<long long>(rng());
  const std::uint64_t range = span + 1;
  const std::uint64_t top = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = top - (top % range + 1) % range;
  std::uint64_t x;
  do x = rng();
  while (x > limit);
  return static_cast<long long>(static_cast<std::uint64_t>(lo) + x % range);
}

} // namespace mc
