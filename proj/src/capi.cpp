#include "multicut/multicut.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "multicut/bench.hpp"
#include "multicut/checkpoint.hpp"
#include "multicut/config.hpp"
#include "multicut/diagnostics.hpp"
#include "multicut/error.hpp"
#include "multicut/io.hpp"
#include "multicut/solve.hpp"
#include "multicut/trainer.hpp"

struct mc_instance {
  mc::Instance value;
};

struct mc_model {
  mc::TmpModel value;
};

struct mc_result {
  mc::SolveOutcome value;
};

namespace {

thread_local std::string last_error;

mc_status fail(mc_status s, const std::string& what) {
  last_error = what;
  return s;
}

template <class F>
mc_status guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const mc::ParseError& e) {
    return fail(MC_ERR_PARSE, e.what());
  } catch (const mc::InfeasibleError& e) {
    return fail(MC_ERR_INFEASIBLE, e.what());
  } catch (const mc::ContractViolation& e) {
    return fail(MC_ERR_INFEASIBLE, e.what());
  } catch (const mc::TimeoutError& e) {
    return fail(MC_ERR_TIMEOUT, e.what());
  } catch (const mc::InputError& e) {
    return fail(MC_ERR_INPUT, e.what());
  } catch (const mc::IoError& e) {
    return fail(MC_ERR_IO, e.what());
  } catch (const mc::NumericError& e) {
    return fail(MC_ERR_NUMERIC, e.what());
  } catch (const std::exception& e) {
    return fail(MC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MC_ERR_INTERNAL, "unknown error");
  }
}

mc::InstanceFormat format_of(const char* f) { return mc::parse_format(f ? f : "edgelist"); }

void emit(mc_line_fn sink, void* user, const std::string& text) {
  if (!sink) return;
  std::istringstream ss(text);
  for (std::string line; std::getline(ss, line);) sink(line.c_str(), user);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

} // namespace

extern "C" {

const char* mc_last_error(void) { return last_error.c_str(); }

const char* mc_status_name(mc_status s) {
  switch (s) {
  case MC_OK: return "ok";
  case MC_ERR_INTERNAL: return "internal error";
  case MC_ERR_PARSE: return "parse error";
  case MC_ERR_INFEASIBLE: return "infeasible";
  case MC_ERR_TIMEOUT: return "timeout";
  case MC_ERR_INPUT: return "invalid input";
  case MC_ERR_IO: return "i/o error";
  case MC_ERR_NUMERIC: return "numeric error";
  }
  return "unknown status";
}

mc_status mc_instance_load(const char* path, const char* format, int negate, mc_instance** out) {
  return guarded([&] {
    if (!path || !out) return fail(MC_ERR_INPUT, "null argument");
    *out = new mc_instance{mc::parse_instance(std::string(path), format_of(format), negate != 0)};
    return MC_OK;
  });
}

mc_status mc_instance_generate(size_t n, long long lo, long long hi, uint64_t seed, mc_instance** out) {
  return guarded([&] {
    if (!out) return fail(MC_ERR_INPUT, "null argument");
    *out = new mc_instance{mc::generate_random(n, lo, hi, seed)};
    return MC_OK;
  });
}

mc_status mc_instance_save(const mc_instance* inst, const char* path, const char* format) {
  return guarded([&] {
    if (!inst || !path) return fail(MC_ERR_INPUT, "null argument");
    mc::write_instance(std::string(path), inst->value, format_of(format));
    return MC_OK;
  });
}

size_t mc_instance_node_count(const mc_instance* inst) { return inst ? inst->value.node_count() : 0; }
size_t mc_instance_edge_count(const mc_instance* inst) { return inst ? inst->value.edge_count() : 0; }

mc_status mc_instance_edge(const mc_instance* inst, size_t e, uint32_t* i, uint32_t* j, double* cost) {
  if (!inst || e >= inst->value.edge_count()) return fail(MC_ERR_INPUT, "edge index out of range");
  const auto& ed = inst->value.edge(e);
  if (i) *i = ed.i;
  if (j) *j = ed.j;
  if (cost) *cost = ed.cost;
  return MC_OK;
}

void mc_instance_free(mc_instance* inst) { delete inst; }

mc_status mc_model_create(const char* config_path, uint64_t seed, mc_model** out) {
  return guarded([&] {
    if (!out) return fail(MC_ERR_INPUT, "null argument");
    const auto cfg = config_path ? mc::model_config_from(mc::KeyValues::load(config_path), mc::ModelConfig::small())
                                 : mc::ModelConfig::small();
    *out = new mc_model{mc::TmpModel(cfg, seed)};
    return MC_OK;
  });
}

mc_status mc_model_load(const char* path, mc_model** out) {
  return guarded([&] {
    if (!path || !out) return fail(MC_ERR_INPUT, "null argument");
    *out = new mc_model{mc::load_model(path)};
    return MC_OK;
  });
}

mc_status mc_model_save(mc_model* model, const char* path) {
  return guarded([&] {
    if (!model || !path) return fail(MC_ERR_INPUT, "null argument");
    mc::save_model(path, model->value);
    return MC_OK;
  });
}

size_t mc_model_parameter_count(const mc_model* model) { return model ? model->value.parameter_count() : 0; }

mc_status mc_model_describe(const mc_model* model, mc_line_fn sink, void* user) {
  return guarded([&] {
    if (!model) return fail(MC_ERR_INPUT, "null argument");
    emit(sink, user, mc::to_text(model->value.config()) + mc::parameter_breakdown(model->value));
    return MC_OK;
  });
}

void mc_model_free(mc_model* model) { delete model; }

mc_status mc_solve(const char* solver, const mc_instance* inst, const mc_model* model, double time_limit,
                   const char* trace_path, mc_result** out) {
  return guarded([&] {
    if (!solver || !inst || !out) return fail(MC_ERR_INPUT, "null argument");
    *out = nullptr;
    mc::SolveOptions opt;
    if (time_limit > 0) opt.time_limit = time_limit;
    if (model) opt.model = &model->value;
    mc::SolveTrace trace;
    if (trace_path) opt.trace = &trace;
    auto outcome = mc::solve(solver, inst->value, opt);
    if (trace_path) {
      std::ofstream os(trace_path);
      if (!os) return fail(MC_ERR_IO, std::string("cannot write '") + trace_path + "'");
      mc::write_trace_jsonl(os, trace);
    }
    if (!mc::is_multicut(inst->value, outcome.labeling))
      return fail(MC_ERR_INFEASIBLE, std::string("solver '") + solver + "' returned an infeasible labeling");
    const bool timed_out = outcome.timed_out;
    *out = new mc_result{std::move(outcome)};
    if (timed_out) return fail(MC_ERR_TIMEOUT, "time limit reached; best labeling found is returned");
    return MC_OK;
  });
}

double mc_result_objective(const mc_result* r) { return r ? r->value.value : NAN; }
double mc_result_wall_time(const mc_result* r) { return r ? r->value.wall_time : NAN; }
int mc_result_proven_optimal(const mc_result* r) { return r && r->value.proven_optimal ? 1 : 0; }
size_t mc_result_size(const mc_result* r) { return r ? r->value.labeling.size() : 0; }
int mc_result_label(const mc_result* r, size_t e) {
  return r && e < r->value.labeling.size() ? r->value.labeling[e] : -1;
}
void mc_result_free(mc_result* r) { delete r; }

mc_status mc_train(const char* config_path, const char* out_model, const char* resume_path, long long seed_override,
                   mc_line_fn log, void* user) {
  return guarded([&] {
    if (!config_path || !out_model) return fail(MC_ERR_INPUT, "null argument");
    const auto kv = mc::KeyValues::load(config_path);
    auto cfg = mc::train_config_from(kv);
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    const std::string out(out_model);
    const std::string curve_path = kv.get("loss_curve", out + ".loss.csv");

    auto say = [&](const std::string& s) { emit(log, user, s); };
    say("generating dataset");
    const auto data = mc::generate_dataset(cfg, say);
    say("dataset: " + std::to_string(data.size()) + " samples");

    mc::TmpModel model(cfg.model, cfg.seed);
    mc::TrainState state;
    if (resume_path) {
      model = mc::load_model(resume_path);
      if (!(model.config() == cfg.model)) return fail(MC_ERR_INPUT, "resume model config differs from the config");
      std::uint64_t next = 0;
      state.adam = mc::load_optimizer(std::string(resume_path) + ".adam", &next);
      state.next_epoch = next;
      say("resuming at epoch " + std::to_string(next));
    }

    mc::TrainHooks hooks;
    hooks.checkpoint = [&](mc::TmpModel& m, const mc::TrainState& s) {
      mc::save_model(out, m);
      mc::save_optimizer(out + ".adam", s.adam, s.next_epoch);
    };
    hooks.diverged = [&](mc::TmpModel& m) {
      mc::save_model(out + ".diverged", m);
      say("non-finite loss; diagnostic checkpoint written to " + out + ".diverged");
    };
    hooks.epoch_done = [&](const mc::EpochStats& e) {
      std::ostringstream os;
      os << "epoch " << e.epoch << " loss " << e.mean_loss << " lr " << e.lr;
      say(os.str());
    };
    const auto result = mc::train(model, data, cfg, hooks, std::move(state));

    std::ofstream curve(curve_path);
    if (!curve) return fail(MC_ERR_IO, "cannot write '" + curve_path + "'");
    mc::write_loss_curve(curve, result.curve);
    say("model written to " + out + ", loss curve to " + curve_path);
    return MC_OK;
  });
}

mc_status mc_bench(const char* const* instance_paths, size_t count, const char* format, const char* solvers,
                   const char* ref_path, const char* out_csv, int parallel, const mc_model* model, uint64_t seed,
                   mc_line_fn log, void* user) {
  return guarded([&] {
    if ((!instance_paths && count) || !solvers || !out_csv) return fail(MC_ERR_INPUT, "null argument");
    const auto fmt = format_of(format);
    std::vector<mc::NamedInstance> instances;
    std::map<std::string, std::size_t> sizes;
    for (size_t k = 0; k < count; ++k) {
      instances.push_back({instance_paths[k], mc::parse_instance(std::string(instance_paths[k]), fmt)});
      sizes[instance_paths[k]] = instances.back().instance.node_count();
    }
    const auto refs = ref_path ? mc::load_references(ref_path) : std::map<std::string, mc::Reference>{};
    mc::BenchOptions opt;
    opt.parallel = parallel != 0;
    opt.seed = seed;
    if (model) opt.solve.model = &model->value;
    const auto records = mc::run_benchmark(instances, split_list(solvers), refs, opt);

    const std::string out(out_csv);
    std::ofstream csv(out);
    if (!csv) return fail(MC_ERR_IO, "cannot write '" + out + "'");
    mc::write_records_csv(csv, records);
    std::ofstream plot_time(out + ".time.csv"), plot_gap(out + ".gap.csv");
    mc::write_plot_csv(plot_time, records, sizes, mc::PlotQuantity::WallTime);
    mc::write_plot_csv(plot_gap, records, sizes, mc::PlotQuantity::Gap);
    std::ostringstream summary;
    mc::write_summary(summary, mc::summarize(records));
    emit(log, user, summary.str());
    return MC_OK;
  });
}

mc_status mc_gradcheck(double tolerance, uint64_t seed, mc_line_fn log, void* user, int* passed) {
  return guarded([&] {
    bool ok = true;
    for (const auto& c : mc::run_gradcheck_suite(seed)) {
      const double err = c.report.max_rel_error();
      const bool pass = c.report.passed(tolerance);
      ok = ok && pass;
      std::ostringstream os;
      os << (pass ? "PASS " : "FAIL ") << c.name << " max_rel_error=" << err;
      emit(log, user, os.str());
    }
    if (passed) *passed = ok ? 1 : 0;
    return MC_OK;
  });
}

} // extern "C"
