#ifndef AMPENC_H
#define AMPENC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AmpencSolver {
  AMPENC_SOLVER_FIXED_POINT = 0,
  AMPENC_SOLVER_NEWTON = 1,
} AmpencSolver;

// Result codes. The nonzero solver codes match the CLI exit codes.
typedef enum AmpencStatus {
  AMPENC_STATUS_OK = 0,
  AMPENC_STATUS_NULL_POINTER = 1,
  AMPENC_STATUS_CONFIG = 2,
  AMPENC_STATUS_SOLVER = 3,
  AMPENC_STATUS_VALIDATION = 4,
  AMPENC_STATUS_INVALID_UTF8 = 5,
  AMPENC_STATUS_OUT_OF_RANGE = 6,
  AMPENC_STATUS_PANIC = 7,
} AmpencStatus;

typedef enum AmpencBackend {
  AMPENC_BACKEND_GATE_LEVEL = 0,
  AMPENC_BACKEND_ALGEBRAIC = 1,
} AmpencBackend;

typedef enum AmpencInversion {
  AMPENC_INVERSION_REFERENCE = 0,
  AMPENC_INVERSION_QSVT = 1,
} AmpencInversion;

// Run configuration.
typedef struct AmpencConfig AmpencConfig;

// Result of a solver run.
typedef struct AmpencReport AmpencReport;

// Per-step scalars of a report.
typedef struct AmpencStepInfo {
  double gamma;
  double eta;
  // Negative when no iterate was recorded.
  double norm;
  uint64_t amplification_rounds;
  uint64_t wires;
  uint64_t gate_count;
} AmpencStepInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *ampenc_version(void);

// Message of the last failed call on this thread, or null. Valid until the
// next call into the library on the same thread.
const char *ampenc_last_error_message(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void ampenc_string_free(char *s);

// Default configuration for `solver` on the built-in problem `paper-g`.
struct AmpencConfig *ampenc_config_new(enum AmpencSolver solver);

// Parses a configuration from its JSON form (the `config` object of a
// report). Writes the new handle to `out`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum AmpencStatus ampenc_config_from_json(const char *json, struct AmpencConfig **out);

// JSON form of a configuration; release with [`ampenc_string_free`].
//
// # Safety
// `cfg` must be a live handle; `out` must be writable.
enum AmpencStatus ampenc_config_to_json(const struct AmpencConfig *cfg, char **out);

// # Safety
// `cfg` must be null or a handle from this library that was not freed.
void ampenc_config_free(struct AmpencConfig *cfg);

// Built-in problem name (`paper-g`, `paper-g-direct`) or problem-file path.
//
// # Safety
// `cfg` must be a live handle and `problem` a NUL-terminated string.
enum AmpencStatus ampenc_config_set_problem(struct AmpencConfig *cfg, const char *problem);

// Initial iterate with `n` entries; `im` may be null for a real vector.
//
// # Safety
// `re` (and `im` if not null) must point to `n` doubles.
enum AmpencStatus ampenc_config_set_x0(struct AmpencConfig *cfg,
                                       const double *re,
                                       const double *im,
                                       size_t n);

// Fixes the number of steps; a negative value restores the planned count.
//
// # Safety
// `cfg` must be a live handle.
enum AmpencStatus ampenc_config_set_steps(struct AmpencConfig *cfg, int64_t steps);

// # Safety
// `cfg` must be a live handle.
enum AmpencStatus ampenc_config_set_backend(struct AmpencConfig *cfg, enum AmpencBackend backend);

// # Safety
// `cfg` must be a live handle.
enum AmpencStatus ampenc_config_set_seed(struct AmpencConfig *cfg, uint64_t seed);

// Switches to Monte Carlo estimation with `shots` per batch and
// `repetitions` batches; `shots == 0` switches back to exact estimation.
//
// # Safety
// `cfg` must be a live handle.
enum AmpencStatus ampenc_config_set_monte_carlo(struct AmpencConfig *cfg,
                                                uint64_t shots,
                                                uint64_t repetitions);

// Linear solver used by Newton steps. `angles_path` may be null to use the
// bundled angle set.
//
// # Safety
// `cfg` must be a live handle; `angles_path` null or NUL-terminated.
enum AmpencStatus ampenc_config_set_inversion(struct AmpencConfig *cfg,
                                              enum AmpencInversion method,
                                              double kappa,
                                              double epsilon,
                                              const char *angles_path);

// Runs the configured solver and writes the report handle to `out`.
//
// # Safety
// `cfg` must be a live handle; `out` must be writable.
enum AmpencStatus ampenc_solve(const struct AmpencConfig *cfg, struct AmpencReport **out);

// # Safety
// `report` must be null or a handle from this library that was not freed.
void ampenc_report_free(struct AmpencReport *report);

// Number of records, the initial iterate included.
//
// # Safety
// `report` must be a live handle.
size_t ampenc_report_len(const struct AmpencReport *report);

// Length of the iterate vectors, or 0 when none were recorded.
//
// # Safety
// `report` must be a live handle.
size_t ampenc_report_dim(const struct AmpencReport *report);

// Copies the iterate of `step` into `re`/`im` (each of length `n`).
//
// # Safety
// `report` must be a live handle; `re` and `im` must hold `n` doubles.
enum AmpencStatus ampenc_report_iterate(const struct AmpencReport *report,
                                        size_t step,
                                        double *re,
                                        double *im,
                                        size_t n);

// # Safety
// `report` must be a live handle; `out` must be writable.
enum AmpencStatus ampenc_report_step(const struct AmpencReport *report,
                                     size_t step,
                                     struct AmpencStepInfo *out);

// Estimate of the final iterate's norm.
//
// # Safety
// `report` must be a live handle.
double ampenc_report_final_norm(const struct AmpencReport *report);

// Full report as JSON; release with [`ampenc_string_free`].
//
// # Safety
// `report` must be a live handle; `out` must be writable.
enum AmpencStatus ampenc_report_to_json(const struct AmpencReport *report, char **out);

// Writes `report.json` and `iterates.csv` into `dir`.
//
// # Safety
// `report` must be a live handle; `dir` a NUL-terminated string.
enum AmpencStatus ampenc_report_write(const struct AmpencReport *report, const char *dir);

// Runs the self-check suite (restricted by `filter` unless null) and
// writes the number of failed checks to `failed`. Returns
// `Validation` if any check failed.
//
// # Safety
// `filter` must be null or NUL-terminated; `failed` null or writable.
enum AmpencStatus ampenc_verify(const char *filter, size_t *failed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AMPENC_H */
