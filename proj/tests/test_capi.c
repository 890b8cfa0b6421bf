/* Exercises the shared library through its C header only. */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "multicut/multicut.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static void count_lines(const char* line, void* user) {
  (void)line;
  ++*(int*)user;
}

int main(void) {
  mc_instance* inst = NULL;
  EXPECT(mc_instance_generate(8, -5, 5, 3, &inst) == MC_OK);
  EXPECT(mc_instance_node_count(inst) == 8);
  EXPECT(mc_instance_edge_count(inst) == 28);
  uint32_t i = 0, j = 0;
  double c = 0;
  EXPECT(mc_instance_edge(inst, 0, &i, &j, &c) == MC_OK && i == 0 && j == 1);
  EXPECT(mc_instance_edge(inst, 28, &i, &j, &c) == MC_ERR_INPUT);

  mc_result* bf = NULL;
  mc_result* gaec = NULL;
  EXPECT(mc_solve("bruteforce", inst, NULL, 0, NULL, &bf) == MC_OK);
  EXPECT(mc_solve("gaec", inst, NULL, 0, NULL, &gaec) == MC_OK);
  EXPECT(mc_result_proven_optimal(bf) == 1);
  EXPECT(mc_result_objective(bf) <= mc_result_objective(gaec));
  EXPECT(mc_result_size(bf) == 28);
  EXPECT(mc_result_label(bf, 99) == -1);

  mc_result* none = NULL;
  EXPECT(mc_solve("gnn", inst, NULL, 0, NULL, &none) == MC_ERR_INPUT);
  EXPECT(strstr(mc_last_error(), "model") != NULL);
  EXPECT(mc_solve("nope", inst, NULL, 0, NULL, &none) == MC_ERR_INPUT);

  mc_model* model = NULL;
  EXPECT(mc_model_create(NULL, 1, &model) == MC_OK);
  EXPECT(mc_model_parameter_count(model) > 0);
  int lines = 0;
  EXPECT(mc_model_describe(model, count_lines, &lines) == MC_OK && lines > 4);
  mc_result* gnn = NULL;
  EXPECT(mc_solve("gnn", inst, model, 0, NULL, &gnn) == MC_OK);
  EXPECT(mc_result_objective(gnn) >= mc_result_objective(bf));

  mc_instance* big = NULL;
  mc_result* partial = NULL;
  EXPECT(mc_instance_generate(60, -5, 5, 1, &big) == MC_OK);
  const mc_status s = mc_solve("bnb", big, NULL, 0.01, NULL, &partial);
  EXPECT(s == MC_ERR_TIMEOUT || s == MC_OK);
  EXPECT(partial != NULL);

  mc_instance* missing = NULL;
  EXPECT(mc_instance_load("/nonexistent", "edgelist", 0, &missing) == MC_ERR_IO);
  EXPECT(mc_instance_load("/nonexistent", "xml", 0, &missing) == MC_ERR_INPUT);

  int passed = 0;
  lines = 0;
  EXPECT(mc_gradcheck(1e-4, 1, count_lines, &lines, &passed) == MC_OK);
  EXPECT(passed == 1 && lines > 5);
  EXPECT(strcmp(mc_status_name(MC_ERR_PARSE), "parse error") == 0);

  mc_result_free(partial);
  mc_instance_free(big);
  mc_result_free(gnn);
  mc_model_free(model);
  mc_result_free(gaec);
  mc_result_free(bf);
  mc_instance_free(inst);
  if (failures) fprintf(stderr, "%d failure(s)\n", failures);
  return failures ? 1 : 0;
}
