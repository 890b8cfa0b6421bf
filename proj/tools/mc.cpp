#include <glob.h>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "multicut/multicut.h"

namespace {

// 0 ok, 2 parse error, 3 infeasible or contract violation, 4 timeout, 1 other.
int exit_code(mc_status s) {
  switch (s) {
  case MC_OK: return 0;
  case MC_ERR_PARSE: return 2;
  case MC_ERR_INFEASIBLE: return 3;
  case MC_ERR_TIMEOUT: return 4;
  default: return 1;
  }
}

int report(mc_status s) {
  if (s != MC_OK) std::cerr << "mc: " << mc_status_name(s) << ": " << mc_last_error() << '\n';
  return exit_code(s);
}

void print_line(const char* line, void*) { std::cout << line << '\n'; }
void log_line(const char* line, void*) { std::cerr << line << '\n'; }

std::optional<unsigned long long> env_seed() {
  const char* s = std::getenv("MC_SEED");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (*end) throw CLI::ValidationError("MC_SEED", "must be a non-negative integer");
  return v;
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t g{};
  std::vector<std::string> out;
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0)
    for (std::size_t k = 0; k < g.gl_pathc; ++k) out.emplace_back(g.gl_pathv[k]);
  globfree(&g);
  return out;
}

using InstancePtr = std::unique_ptr<mc_instance, decltype(&mc_instance_free)>;
using ModelPtr = std::unique_ptr<mc_model, decltype(&mc_model_free)>;
using ResultPtr = std::unique_ptr<mc_result, decltype(&mc_result_free)>;

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multicut solvers, a triangle message passing model and benchmark tooling"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Write a random complete instance with uniform integer costs");
  std::size_t gen_n = 10;
  long long gen_lo = -5, gen_hi = 5;
  unsigned long long gen_seed = 0;
  std::string gen_out;
  gen->add_option("--n", gen_n, "Node count")->required();
  gen->add_option("--lo", gen_lo, "Smallest cost")->required();
  gen->add_option("--hi", gen_hi, "Largest cost")->required();
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output edgelist path")->required();

  auto* solve = app.add_subcommand("solve", "Solve one instance");
  std::string in_path, format = "edgelist", solver = "gaec", model_path, trace_path;
  bool negate = false;
  double time_limit = 0.0;
  solve->add_option("--in", in_path, "Instance file")->required();
  solve->add_option("--format", format, "Instance format")->check(CLI::IsMember({"edgelist", "lt"}));
  solve->add_flag("--negate", negate, "Negate every cost (join-reward files)");
  solve->add_option("--solver", solver, "Solver")
      ->check(CLI::IsMember({"gaec", "gf", "mws", "klj", "bruteforce", "bnb", "gnn", "gnn1"}));
  solve->add_option("--model", model_path, "Model checkpoint (gnn, gnn1)");
  solve->add_option("--time-limit", time_limit, "Seconds (bnb)")->check(CLI::NonNegativeNumber);
  solve->add_option("--trace", trace_path, "Write the contraction trace as JSON lines (gnn, gnn1)");

  auto* train = app.add_subcommand("train", "Generate labeled data and train a model");
  std::string train_config, out_model, resume;
  train->add_option("--config", train_config, "Training config (key=value)")->required()->check(CLI::ExistingFile);
  train->add_option("--out-model", out_model, "Checkpoint path")->required();
  train->add_option("--resume", resume, "Checkpoint to continue from")->check(CLI::ExistingFile);

  auto* bench = app.add_subcommand("bench", "Run solvers over many instances");
  std::string pattern, solvers = "gaec", ref_path, out_csv, bench_format = "edgelist", bench_model;
  bool parallel = false;
  bench->add_option("--instances", pattern, "Glob of instance files")->required();
  bench->add_option("--solvers", solvers, "Comma separated solver list")->required();
  bench->add_option("--ref", ref_path, "Reference values (instance,value,optimal)");
  bench->add_option("--out", out_csv, "Records CSV")->required();
  bench->add_option("--format", bench_format, "Instance format")->check(CLI::IsMember({"edgelist", "lt"}));
  bench->add_option("--model", bench_model, "Model checkpoint for gnn solvers");
  bench->add_flag("--parallel", parallel, "Solve instances concurrently");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every gradient");
  double tolerance = 1e-4;
  gradcheck->add_option("--tolerance", tolerance, "Largest accepted relative error")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help exits 0; every usage error collapses to the generic failure code.
    return app.exit(e) == 0 ? 0 : 1;
  }

  std::optional<unsigned long long> seed;
  try {
    seed = env_seed();
  } catch (const CLI::Error& e) {
    std::cerr << "mc: " << e.what() << '\n';
    return 1;
  }

  if (gen->parsed()) {
    mc_instance* raw = nullptr;
    if (auto s = mc_instance_generate(gen_n, gen_lo, gen_hi, gen->count("--seed") ? gen_seed : seed.value_or(gen_seed), &raw))
      return report(s);
    InstancePtr inst(raw, mc_instance_free);
    return report(mc_instance_save(inst.get(), gen_out.c_str(), "edgelist"));
  }

  if (solve->parsed()) {
    mc_instance* raw = nullptr;
    if (auto s = mc_instance_load(in_path.c_str(), format.c_str(), negate, &raw)) return report(s);
    InstancePtr inst(raw, mc_instance_free);
    ModelPtr model(nullptr, mc_model_free);
    if (!model_path.empty()) {
      mc_model* m = nullptr;
      if (auto s = mc_model_load(model_path.c_str(), &m)) return report(s);
      model.reset(m);
    }
    mc_result* res = nullptr;
    const mc_status s = mc_solve(solver.c_str(), inst.get(), model.get(), time_limit,
                                 trace_path.empty() ? nullptr : trace_path.c_str(), &res);
    ResultPtr result(res, mc_result_free);
    if (result) {
      std::printf("objective %.17g\nwall_time %.6f\nproven_optimal %d\ncut", mc_result_objective(res),
                  mc_result_wall_time(res), mc_result_proven_optimal(res));
      for (std::size_t e = 0; e < mc_result_size(res); ++e) {
        if (!mc_result_label(res, e)) continue;
        std::uint32_t i = 0, j = 0;
        mc_instance_edge(inst.get(), e, &i, &j, nullptr);
        std::printf(" %u-%u", i, j);
      }
      std::printf("\n");
    }
    return report(s);
  }

  if (train->parsed()) {
    const long long override_seed = seed ? static_cast<long long>(*seed) : -1;
    return report(mc_train(train_config.c_str(), out_model.c_str(), resume.empty() ? nullptr : resume.c_str(),
                           override_seed, log_line, nullptr));
  }

  if (bench->parsed()) {
    const auto paths = expand_glob(pattern);
    if (paths.empty()) {
      std::cerr << "mc: no files match '" << pattern << "'\n";
      return 1;
    }
    std::vector<const char*> cpaths;
    for (const auto& p : paths) cpaths.push_back(p.c_str());
    ModelPtr model(nullptr, mc_model_free);
    if (!bench_model.empty()) {
      mc_model* m = nullptr;
      if (auto s = mc_model_load(bench_model.c_str(), &m)) return report(s);
      model.reset(m);
    }
    return report(mc_bench(cpaths.data(), cpaths.size(), bench_format.c_str(), solvers.c_str(),
                           ref_path.empty() ? nullptr : ref_path.c_str(), out_csv.c_str(), parallel, model.get(),
                           seed.value_or(0), print_line, nullptr));
  }

  int passed = 0;
  if (auto s = mc_gradcheck(tolerance, seed.value_or(1), print_line, nullptr, &passed)) return report(s);
  return passed ? 0 : 1;
}
