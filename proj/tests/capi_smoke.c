#include <math.h>
#include <stdio.h>
#include <string.h>

#include "dimlab/dimlab.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

int main(void) {
  dimlab_context* ctx = NULL;
  EXPECT(dimlab_context_new(2, 7, &ctx) == DIMLAB_OK);
  EXPECT(dimlab_context_threads(ctx) == 2);
  EXPECT(dimlab_context_seed(ctx) == 7);
  EXPECT(strlen(dimlab_version()) > 0);
  EXPECT(strcmp(dimlab_status_name(DIMLAB_E_BUDGET_EXCEEDED), dimlab_status_name(DIMLAB_OK)) != 0);

  dimlab_map* map = NULL;
  EXPECT(dimlab_map_from_json(ctx, "{\"family\": \"manneville\", \"beta\": 1}", &map) == DIMLAB_OK);
  int branches = 0;
  EXPECT(dimlab_map_branch_count(ctx, map, &branches) == DIMLAB_OK && branches == 2);
  double y = 0.0;
  EXPECT(dimlab_map_eval(ctx, map, 0.5, &y) == DIMLAB_OK && fabs(y - 0.75) < 1e-15);
  EXPECT(dimlab_map_eval(ctx, map, 1.5, &y) == DIMLAB_E_OUT_OF_DOMAIN);
  EXPECT(strlen(dimlab_last_error(ctx)) > 0);

  dimlab_map* bad = NULL;
  EXPECT(dimlab_map_from_json(ctx, "{not json", &bad) == DIMLAB_E_PARSE);
  EXPECT(bad == NULL);

  dimlab_measure* mu = NULL;
  EXPECT(dimlab_measure_from_json(ctx, "{\"type\": \"bernoulli\", \"p\": [0.5, 0.5]}", &mu) == DIMLAB_OK);
  double h = 0.0, lam = 0.0;
  EXPECT(dimlab_entropy(ctx, mu, &h) == DIMLAB_OK && fabs(h - log(2.0)) < 1e-14);
  EXPECT(dimlab_lyapunov(ctx, map, mu, &lam) == DIMLAB_OK && lam > 0.0 && lam < log(3.0));

  char* out = NULL;
  EXPECT(dimlab_cylinders(ctx, map, 3, &out) == DIMLAB_OK);
  EXPECT(out && strstr(out, "\"word\"") != NULL);
  dimlab_string_free(out);

  out = NULL;
  EXPECT(dimlab_pressure(ctx, map, "{\"s\": [0.5], \"n_min\": 6, \"n_max\": 10}", &out) == DIMLAB_OK);
  EXPECT(out && strstr(out, "\"rows\"") != NULL);
  dimlab_string_free(out);

  double pts[16];
  EXPECT(dimlab_sample_measure(ctx, map, mu, 16, 20, pts) == DIMLAB_OK);
  for (int i = 0; i < 16; ++i) EXPECT(pts[i] >= 0.0 && pts[i] <= 1.0);
  out = NULL;
  EXPECT(dimlab_box_dimension(ctx, pts, 16, 4, 16, &out) == DIMLAB_E_TOO_FEW_POINTS);
  EXPECT(out == NULL);

  dimlab_scheme* scheme = NULL;
  EXPECT(dimlab_moran_build(ctx, map, mu, "{\"kind\": \"product\", \"padded\": true, \"pad_symbol\": 1, \"stages\": 2}",
                            &scheme) == DIMLAB_E_PAD_SYMBOL_INVALID);

  out = NULL;
  EXPECT(dimlab_repro_names(ctx, &out) == DIMLAB_OK && strstr(out, "lemma21") != NULL);
  dimlab_string_free(out);
  out = NULL;
  EXPECT(dimlab_repro(ctx, "no-such-table", &out) == DIMLAB_E_INVALID_ARGUMENT);

  dimlab_measure_free(mu);
  dimlab_map_free(map);
  dimlab_context_free(ctx);
  if (failures) fprintf(stderr, "%d failures\n", failures);
  return failures ? 1 : 0;
}
