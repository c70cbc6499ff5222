#ifndef DIMLAB_H
#define DIMLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(DIMLAB_BUILDING)
#define DIMLAB_API __attribute__((visibility("default")))
#else
#define DIMLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Nonzero values other than DIMLAB_E_INTERNAL match the
   library's error kinds one to one. */
typedef enum {
  DIMLAB_OK = 0,
  DIMLAB_E_INVALID_ARGUMENT = 1,
  DIMLAB_E_OUT_OF_DOMAIN = 2,
  DIMLAB_E_NO_CONVERGENCE = 3,
  DIMLAB_E_NOT_UNIQUE = 4,
  DIMLAB_E_BUDGET_EXCEEDED = 5,
  DIMLAB_E_ORBIT_ESCAPED = 6,
  DIMLAB_E_DEGENERATE = 7,
  DIMLAB_E_EMPTY_SELECTION = 8,
  DIMLAB_E_NO_BRACKET = 9,
  DIMLAB_E_INFEASIBLE = 10,
  DIMLAB_E_HARVEST_FAILED = 11,
  DIMLAB_E_MALFORMED_SCHEME = 12,
  DIMLAB_E_PAD_SYMBOL_INVALID = 13,
  DIMLAB_E_TOO_FEW_POINTS = 14,
  DIMLAB_E_PRECONDITION = 15,
  DIMLAB_E_PARSE = 16,
  DIMLAB_E_IO = 17,
  DIMLAB_E_INTERNAL = 100
} dimlab_status;

typedef struct dimlab_context dimlab_context;
typedef struct dimlab_map dimlab_map;
typedef struct dimlab_measure dimlab_measure;
typedef struct dimlab_scheme dimlab_scheme;

DIMLAB_API const char* dimlab_version(void);
DIMLAB_API const char* dimlab_status_name(int status);

/* threads <= 0 selects the machine parallelism. The context keeps the
   message of the last failed call made through it. */
DIMLAB_API int dimlab_context_new(int threads, uint64_t seed, dimlab_context** out);
DIMLAB_API void dimlab_context_free(dimlab_context* ctx);
DIMLAB_API const char* dimlab_last_error(const dimlab_context* ctx);
DIMLAB_API int dimlab_context_threads(const dimlab_context* ctx);
DIMLAB_API uint64_t dimlab_context_seed(const dimlab_context* ctx);

/* Strings returned through char** are owned by the caller. */
DIMLAB_API void dimlab_string_free(char* s);

DIMLAB_API int dimlab_map_from_json(dimlab_context* ctx, const char* json, dimlab_map** out);
DIMLAB_API int dimlab_map_load(dimlab_context* ctx, const char* path, dimlab_map** out);
DIMLAB_API void dimlab_map_free(dimlab_map* map);
DIMLAB_API int dimlab_map_branch_count(dimlab_context* ctx, const dimlab_map* map, int* out);
DIMLAB_API int dimlab_map_eval(dimlab_context* ctx, const dimlab_map* map, double x, double* out);
DIMLAB_API int dimlab_map_report(dimlab_context* ctx, const dimlab_map* map, char** json_out);

DIMLAB_API int dimlab_measure_from_json(dimlab_context* ctx, const char* json, dimlab_measure** out);
DIMLAB_API int dimlab_measure_load(dimlab_context* ctx, const char* path, dimlab_measure** out);
DIMLAB_API void dimlab_measure_free(dimlab_measure* mu);
DIMLAB_API int dimlab_entropy(dimlab_context* ctx, const dimlab_measure* mu, double* out);
DIMLAB_API int dimlab_lyapunov(dimlab_context* ctx, const dimlab_map* map, const dimlab_measure* mu, double* out);
/* {"value", "truncation_bound", "quadrature_bound"} */
DIMLAB_API int dimlab_metric(dimlab_context* ctx, const dimlab_map* map, const dimlab_measure* mu,
                             const dimlab_measure* nu, int moments, char** json_out);

/* [{"word", "lo", "hi", "diam", "sum_g"}, ...] in lexicographic order. */
DIMLAB_API int dimlab_cylinders(dimlab_context* ctx, const dimlab_map* map, int depth, char** json_out);
DIMLAB_API int dimlab_lemma21_gap(dimlab_context* ctx, const dimlab_map* map, int n, double* out);

/* Requests and reports are JSON documents; field names are listed in the
   README. A null request selects the defaults. */
DIMLAB_API int dimlab_pressure(dimlab_context* ctx, const dimlab_map* map, const char* request, char** json_out);
DIMLAB_API int dimlab_bowen(dimlab_context* ctx, const dimlab_map* map, const char* request, char** json_out);
DIMLAB_API int dimlab_sup_ratio(dimlab_context* ctx, const dimlab_map* map, const char* request, char** json_out);

DIMLAB_API int dimlab_moran_build(dimlab_context* ctx, const dimlab_map* map, const dimlab_measure* mu,
                                  const char* request, dimlab_scheme** out);
DIMLAB_API int dimlab_scheme_from_json(dimlab_context* ctx, const char* json, dimlab_scheme** out);
DIMLAB_API int dimlab_scheme_load(dimlab_context* ctx, const char* path, dimlab_scheme** out);
DIMLAB_API void dimlab_scheme_free(dimlab_scheme* scheme);
DIMLAB_API int dimlab_scheme_to_json(dimlab_context* ctx, const dimlab_scheme* scheme, char** json_out);
/* Product schemes need the map; explicit schemes ignore it. */
DIMLAB_API int dimlab_scheme_check(dimlab_context* ctx, const dimlab_scheme* scheme, const dimlab_map* map,
                                   char** json_out);

/* Fill out[0..count) with sample points of the measure (words of `depth`
   symbols) or of the scheme. */
DIMLAB_API int dimlab_sample_measure(dimlab_context* ctx, const dimlab_map* map, const dimlab_measure* mu,
                                     size_t count, int depth, double* out);
DIMLAB_API int dimlab_sample_scheme(dimlab_context* ctx, const dimlab_scheme* scheme, const dimlab_map* map,
                                    size_t count, double* out);
DIMLAB_API int dimlab_box_dimension(dimlab_context* ctx, const double* points, size_t count, int j_min, int j_max,
                                    char** json_out);
/* Distance of the orbit's empirical measures to mu along a geometric grid.
   The orbit starts at {"x0", "n_max"}, at pi({"word"}), or, when a
   scheme is given, at a scheme point drawn with {"sample"} as sub-seed. */
DIMLAB_API int dimlab_trace(dimlab_context* ctx, const dimlab_map* map, const dimlab_measure* mu,
                            const dimlab_scheme* scheme, const char* request, char** json_out);

/* Newline separated names. */
DIMLAB_API int dimlab_repro_names(dimlab_context* ctx, char** out);
DIMLAB_API int dimlab_repro(dimlab_context* ctx, const char* name, char** csv_out);

#ifdef __cplusplus
}
#endif

#endif
