#ifndef MULTICUT_H
#define MULTICUT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(MULTICUT_BUILD)
#define MC_API __attribute__((visibility("default")))
#else
#define MC_API
#endif

typedef enum mc_status {
  MC_OK = 0,
  MC_ERR_INTERNAL = 1,
  MC_ERR_PARSE = 2,
  MC_ERR_INFEASIBLE = 3, /* also contract violations */
  MC_ERR_TIMEOUT = 4,
  MC_ERR_INPUT = 5,
  MC_ERR_IO = 6,
  MC_ERR_NUMERIC = 7
} mc_status;

typedef struct mc_instance mc_instance;
typedef struct mc_model mc_model;
typedef struct mc_result mc_result;

/* Receives one line of progress or report output (no trailing newline). */
typedef void (*mc_line_fn)(const char* line, void* user);

/* Message of the last failing call on this thread; "" if none. */
MC_API const char* mc_last_error(void);
MC_API const char* mc_status_name(mc_status status);

/* format: "edgelist" or "lt". */
MC_API mc_status mc_instance_load(const char* path, const char* format, int negate, mc_instance** out);
MC_API mc_status mc_instance_generate(size_t n, long long lo, long long hi, uint64_t seed, mc_instance** out);
MC_API mc_status mc_instance_save(const mc_instance* inst, const char* path, const char* format);
MC_API size_t mc_instance_node_count(const mc_instance* inst);
MC_API size_t mc_instance_edge_count(const mc_instance* inst);
MC_API mc_status mc_instance_edge(const mc_instance* inst, size_t e, uint32_t* i, uint32_t* j, double* cost);
MC_API void mc_instance_free(mc_instance* inst);

/* config_path may be NULL for the small default (4 layers, width 16). */
MC_API mc_status mc_model_create(const char* config_path, uint64_t seed, mc_model** out);
MC_API mc_status mc_model_load(const char* path, mc_model** out);
MC_API mc_status mc_model_save(mc_model* model, const char* path);
MC_API size_t mc_model_parameter_count(const mc_model* model);
MC_API mc_status mc_model_describe(const mc_model* model, mc_line_fn sink, void* user);
MC_API void mc_model_free(mc_model* model);

/* solver: gaec, gf, mws, klj, bruteforce, bnb, gnn, gnn1. model is required by
   gnn and gnn1 and ignored otherwise. time_limit <= 0 means none. trace_path,
   when not NULL, receives the contraction trace of gnn/gnn1 as JSON lines.
   A bnb run that hits its limit returns MC_ERR_TIMEOUT and still sets *out to
   the best labeling found. */
MC_API mc_status mc_solve(const char* solver, const mc_instance* inst, const mc_model* model, double time_limit,
                          const char* trace_path, mc_result** out);
MC_API double mc_result_objective(const mc_result* r);
MC_API double mc_result_wall_time(const mc_result* r);
MC_API int mc_result_proven_optimal(const mc_result* r);
MC_API size_t mc_result_size(const mc_result* r);
/* 1 = cut, per edge of the instance in its stored order. */
MC_API int mc_result_label(const mc_result* r, size_t e);
MC_API void mc_result_free(mc_result* r);

/* seed_override < 0 keeps the config's seed. resume_path may be NULL. */
MC_API mc_status mc_train(const char* config_path, const char* out_model, const char* resume_path,
                          long long seed_override, mc_line_fn log, void* user);

/* solvers: comma separated. ref_path may be NULL. model may be NULL unless a
   gnn solver is listed. The summary is reported through log. */
MC_API mc_status mc_bench(const char* const* instance_paths, size_t count, const char* format, const char* solvers,
                          const char* ref_path, const char* out_csv, int parallel, const mc_model* model,
                          uint64_t seed, mc_line_fn log, void* user);

/* Runs the finite-difference suite; *passed is 1 when every case is below
   tolerance. */
MC_API mc_status mc_gradcheck(double tolerance, uint64_t seed, mc_line_fn log, void* user, int* passed);

#ifdef __cplusplus
}
#endif

#endif
