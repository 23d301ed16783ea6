#ifndef ANONSIM_H
#define ANONSIM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AnonsimStatus {
  ANONSIM_STATUS_OK = 0,
  ANONSIM_STATUS_NULL_ARGUMENT = 1,
  ANONSIM_STATUS_INVALID_UTF8 = 2,
  ANONSIM_STATUS_INVALID_PARAMETER = 3,
  ANONSIM_STATUS_CONFIG = 4,
  ANONSIM_STATUS_PARSE = 5,
  ANONSIM_STATUS_IMPOSSIBLE_OBSERVATION = 6,
  ANONSIM_STATUS_INVARIANT_VIOLATION = 7,
  ANONSIM_STATUS_EMPTY_INPUT = 8,
  ANONSIM_STATUS_INSUFFICIENT_DATA = 9,
  ANONSIM_STATUS_IO = 10,
  ANONSIM_STATUS_PANIC = 11,
} AnonsimStatus;

typedef enum AnonsimStrategy {
  ANONSIM_STRATEGY_RANDOM = 0,
  ANONSIM_STRATEGY_TOP_DEGREE = 1,
  ANONSIM_STRATEGY_TOP_BETWEENNESS = 2,
} AnonsimStrategy;

typedef enum AnonsimStemScheme {
  ANONSIM_STEM_SCHEME_DANDELION = 0,
  ANONSIM_STEM_SCHEME_DANDELION_PP = 1,
} AnonsimStemScheme;

typedef enum AnonsimFormat {
  ANONSIM_FORMAT_CSV = 0,
  ANONSIM_FORMAT_STRUCTURED = 1,
} AnonsimFormat;

typedef struct AnonsimConfig AnonsimConfig;

typedef struct AnonsimReport AnonsimReport;

typedef struct AnonsimTopology AnonsimTopology;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Owned by the library; valid until
// the next failing call on the same thread.
const char *anonsim_last_error(void);

// Library version as a static string.
const char *anonsim_version(void);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void anonsim_string_free(char *s);

// Generate a topology from a JSON generator description such as
// `{"generator": "quasi4", "n": 1000}`.
//
// # Safety
// `spec_json` must be a valid C string; `out` must be writable.
enum AnonsimStatus anonsim_topology_generate(const char *spec_json,
                                             uint64_t seed,
                                             struct AnonsimTopology **out);

// Load a channel snapshot document (JSON).
//
// # Safety
// `document` must be a valid C string; `out` must be writable.
enum AnonsimStatus anonsim_topology_load_snapshot(const char *document,
                                                  struct AnonsimTopology **out);

// A copy of `topology` with `count` adversaries chosen by `strategy`.
//
// # Safety
// `topology` must be a live handle; `out` must be writable.
enum AnonsimStatus anonsim_topology_assign_adversaries(const struct AnonsimTopology *topology,
                                                       enum AnonsimStrategy strategy,
                                                       size_t count,
                                                       uint64_t seed,
                                                       struct AnonsimTopology **out);

// # Safety
// `topology` must be a live handle.
size_t anonsim_topology_node_count(const struct AnonsimTopology *topology);

// # Safety
// `topology` must be a live handle.
size_t anonsim_topology_edge_count(const struct AnonsimTopology *topology);

// Whether `node` is adversarial; false for out-of-range nodes.
//
// # Safety
// `topology` must be a live handle.
bool anonsim_topology_is_adversarial(const struct AnonsimTopology *topology, uint32_t node);

// Serialize as a snapshot document. Free the result with [`anonsim_string_free`].
//
// # Safety
// `topology` must be a live handle; `out` must be writable.
enum AnonsimStatus anonsim_topology_emit_snapshot(const struct AnonsimTopology *topology,
                                                  bool include_roles,
                                                  char **out);

// # Safety
// `topology` must be null or a live handle; it is invalid afterwards.
void anonsim_topology_free(struct AnonsimTopology *topology);

// Shannon entropy, in bits, of the posterior a stem-phase adversary forms after `adversary`
// receives a transaction from `predecessor`.
//
// # Safety
// `topology` must be a live handle; `out_bits` must be writable.
enum AnonsimStatus anonsim_stem_entropy(const struct AnonsimTopology *topology,
                                        enum AnonsimStemScheme scheme,
                                        double p_f,
                                        uint32_t adversary,
                                        uint32_t predecessor,
                                        double *out_bits);

// Shannon entropy in bits of a probability vector summing to 1.
//
// # Safety
// `values` must point to `len` doubles; `out_bits` must be writable.
enum AnonsimStatus anonsim_entropy_bits(const double *values, size_t len, double *out_bits);

// Min-entropy in bits of a probability vector summing to 1.
//
// # Safety
// `values` must point to `len` doubles; `out_bits` must be writable.
enum AnonsimStatus anonsim_min_entropy_bits(const double *values, size_t len, double *out_bits);

// Parse and validate a TOML experiment configuration. Relative paths resolve against
// `base_dir`, which may be null.
//
// # Safety
// `document` must be a valid C string, `base_dir` null or a valid C string; `out` writable.
enum AnonsimStatus anonsim_config_parse(const char *document,
                                        const char *base_dir,
                                        struct AnonsimConfig **out);

// Override the configured seed.
//
// # Safety
// `config` must be a live handle.
enum AnonsimStatus anonsim_config_set_seed(struct AnonsimConfig *config, uint64_t seed);

// # Safety
// `config` must be null or a live handle; it is invalid afterwards.
void anonsim_config_free(struct AnonsimConfig *config);

// Run the experiment on `workers` threads (0 means one per available core).
//
// # Safety
// `config` must be a live handle; `out` must be writable.
enum AnonsimStatus anonsim_run(const struct AnonsimConfig *config,
                               size_t workers,
                               struct AnonsimReport **out);

// Render a report. `out_main` receives the document; `out_meta` (may be null) receives the
// sibling metadata document for CSV experiment reports and null otherwise. Free both with
// [`anonsim_string_free`].
//
// # Safety
// `report` must be a live handle; `out_main` writable; `out_meta` null or writable.
enum AnonsimStatus anonsim_report_render(const struct AnonsimReport *report,
                                         enum AnonsimFormat fmt,
                                         char **out_main,
                                         char **out_meta);

// Write a report to `path` (plus `<path>.meta.json` for CSV experiment reports).
//
// # Safety
// `report` must be a live handle; `path` a valid C string.
enum AnonsimStatus anonsim_report_write(const struct AnonsimReport *report,
                                        enum AnonsimFormat fmt,
                                        const char *path);

// Median entropy of the intercepted transactions, or NaN when there are none or the report is
// a learning report.
//
// # Safety
// `report` must be a live handle.
double anonsim_report_median_entropy(const struct AnonsimReport *report);

// Share of transactions intercepted, or NaN for learning reports.
//
// # Safety
// `report` must be a live handle.
double anonsim_report_intercept_fraction(const struct AnonsimReport *report);

// # Safety
// `report` must be null or a live handle; it is invalid afterwards.
void anonsim_report_free(struct AnonsimReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANONSIM_H */
