#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "multicut/core.hpp"
#include "multicut/solve.hpp"

namespace mc {

// (value - reference) / |reference|; throws InputError for reference 0.
double optimality_gap(double value, double reference);
std::optional<double> try_optimality_gap(double value, double reference);

struct Reference {
  double value = 0.0;
  bool optimal = false; // false: best known only
};

struct BenchRecord {
  std::string instance;
  std::string solver;
  double objective = 0.0;
  std::optional<double> reference;
  bool reference_optimal = false;
  std::optional<double> gap; // only against optimal, nonzero references
  double wall_time = 0.0;
  std::uint64_t seed = 0;
  bool feasible = false;
  std::string error; // non-empty when the solver failed

  friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

struct NamedInstance {
  std::string name;
  Instance instance;
};

struct BenchOptions {
  bool parallel = false;
  std::uint64_t seed = 0;
  SolveOptions solve;
};

// One record per (instance, solver); a failing solver is recorded and the
// campaign continues. Timing covers the solve call only.
std::vector<BenchRecord> run_benchmark(const std::vector<NamedInstance>& instances,
                                       const std::vector<std::string>& solvers,
                                       const std::map<std::string, Reference>& references,
                                       const BenchOptions& opt = {});

// Doubles are written with round-trip precision; reading reproduces every
// field exactly. Throws ParseError on malformed rows.
void write_records_csv(std::ostream& os, const std::vector<BenchRecord>& records);
std::vector<BenchRecord> read_records_csv(std::istream& is);

// "instance,value,optimal" with optimal in {0,1}.
std::map<std::string, Reference> read_references_csv(std::istream& is);
std::map<std::string, Reference> load_references(const std::string& path);

double quantile(std::vector<double> values, double q); // linear interpolation

struct SolverSummary {
  std::string solver;
  std::size_t records = 0;
  std::size_t gap_records = 0;
  std::size_t feasible = 0;
  std::size_t failures = 0;
  double mean_gap = 0.0;
  double gap_q25 = 0.0;
  double gap_q75 = 0.0;
  double mean_time = 0.0;
  double time_q25 = 0.0;
  double time_q75 = 0.0;
};

std::vector<SolverSummary> summarize(const std::vector<BenchRecord>& records);
void write_summary(std::ostream& os, const std::vector<SolverSummary>& summary);

// Plot-ready series per solver: solver,x,median,q25,q75 where x is the node
// count and the y quantity is wall_time or gap.
enum class PlotQuantity { WallTime, Gap };
void write_plot_csv(std::ostream& os, const std::vector<BenchRecord>& records,
                    const std::map<std::string, std::size_t>& node_counts, PlotQuantity quantity);

} // namespace mc
