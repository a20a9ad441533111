#ifndef LECAM_H
#define LECAM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum LecamStatus {
  LECAM_STATUS_OK = 0,
  LECAM_STATUS_NULL_POINTER = 1,
  LECAM_STATUS_INVALID_UTF8 = 2,
  LECAM_STATUS_INVALID_ARGUMENT = 3,
  LECAM_STATUS_NOT_PROBABILITY = 4,
  LECAM_STATUS_INCOMPATIBLE_GRIDS = 5,
  LECAM_STATUS_UNSUPPORTED = 6,
  LECAM_STATUS_CONFIG = 7,
  LECAM_STATUS_IO = 8,
  LECAM_STATUS_PANIC = 9,
} LecamStatus;

// A finite measure on the line: a lattice law or a finite set of atoms.
typedef struct LecamMeasure LecamMeasure;

// A finished scenario run: report plus artifacts.
typedef struct LecamOutcome LecamOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the next call.
const char *lecam_last_error(void);

// Library version as a static NUL-terminated string.
const char *lecam_version(void);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void lecam_string_free(char *s);

// JSON array of `{name, description, anchor}` for every scenario.
//
// # Safety
// `out` must be a valid pointer.
enum LecamStatus lecam_scenarios_json(char **out);

// Runs a scenario from a JSON config. A config problem returns `Config` before any
// computation. A run whose checks fail still returns `Ok`; query
// [`lecam_outcome_passed`]. If the config names `out`, artifacts are written there.
//
// # Safety
// `config_json` must be a NUL-terminated string and `out` a valid pointer.
enum LecamStatus lecam_scenario_run(const char *config_json, struct LecamOutcome **out);

// 1 if every check passed, 0 if not, -1 for NULL.
//
// # Safety
// `o` must be NULL or a live outcome handle.
int lecam_outcome_passed(const struct LecamOutcome *o);

// Wall-clock duration of the run in seconds, or NaN for NULL.
//
// # Safety
// `o` must be NULL or a live outcome handle.
double lecam_outcome_duration(const struct LecamOutcome *o);

// The report as JSON.
//
// # Safety
// `o` must be a live outcome handle and `out` a valid pointer.
enum LecamStatus lecam_outcome_report_json(const struct LecamOutcome *o, char **out);

// Writes `report.json` and the CSV artifacts into `dir`, creating it if needed.
//
// # Safety
// `o` must be a live outcome handle and `dir` a NUL-terminated string.
enum LecamStatus lecam_outcome_write(const struct LecamOutcome *o, const char *dir);

// # Safety
// `o` must be NULL or a handle from [`lecam_scenario_run`] not yet freed.
void lecam_outcome_free(struct LecamOutcome *o);

// Lattice measure with masses at `origin + j·step`. Masses must be non-negative.
//
// # Safety
// `masses` must point to `len` doubles and `out` must be valid.
enum LecamStatus lecam_measure_grid(double origin,
                                    double step,
                                    const double *masses,
                                    size_t len,
                                    struct LecamMeasure **out);

// Atomic measure with weight `weights[i]` at `points[i]`.
//
// # Safety
// `points` and `weights` must each point to `len` doubles and `out` must be valid.
enum LecamStatus lecam_measure_atoms(const double *points,
                                     const double *weights,
                                     size_t len,
                                     struct LecamMeasure **out);

// Total mass.
//
// # Safety
// `m` must be a live measure handle and `out` valid.
enum LecamStatus lecam_measure_total_mass(const struct LecamMeasure *m, double *out);

// Number of support points (lattice length or atom count).
//
// # Safety
// `m` must be a live measure handle and `out` valid.
enum LecamStatus lecam_measure_len(const struct LecamMeasure *m, size_t *out);

// Copies the support points and masses into caller buffers of capacity `cap`,
// which must be at least [`lecam_measure_len`].
//
// # Safety
// `points` and `masses` must each hold `cap` doubles.
enum LecamStatus lecam_measure_points(const struct LecamMeasure *m,
                                      double *points,
                                      double *masses,
                                      size_t cap);

// Characteristic function `∫ e^{itx} dm` at `n` frequencies, which must be ascending,
// symmetric about 0 and contain 0.
//
// # Safety
// `freqs`, `re` and `im` must each hold `n` doubles.
enum LecamStatus lecam_measure_charfn(const struct LecamMeasure *m,
                                      const double *freqs,
                                      size_t n,
                                      double *re,
                                      double *im);

// Convolution `a ∗ b`. At least one side must be a lattice measure; atoms are snapped
// to the lattice.
//
// # Safety
// `a`, `b` must be live measure handles and `out` valid.
enum LecamStatus lecam_convolve(const struct LecamMeasure *a,
                                const struct LecamMeasure *b,
                                struct LecamMeasure **out);

// Total-variation distance `sup_A |a(A) − b(A)|`.
//
// # Safety
// `a`, `b` must be live measure handles and `out` valid.
enum LecamStatus lecam_distance_tv(const struct LecamMeasure *a,
                                   const struct LecamMeasure *b,
                                   double *out);

// Kolmogorov distance between distribution functions.
//
// # Safety
// `a`, `b` must be live measure handles and `out` valid.
enum LecamStatus lecam_distance_ks(const struct LecamMeasure *a,
                                   const struct LecamMeasure *b,
                                   double *out);

// Decides whether `q = ν ∗ p` for a probability `ν` by deconvolution on `|t| ≤ band`
// where `|φ_p| ≥ floor`. Writes 1 or 0 to `holds`; when it holds and `nu` is not
// NULL, the estimate of `ν` is returned there, otherwise `*nu` is set to NULL.
//
// # Safety
// `q`, `p` must be live lattice measure handles; `holds` valid; `nu` NULL or valid.
enum LecamStatus lecam_check_spread(const struct LecamMeasure *q,
                                    const struct LecamMeasure *p,
                                    double band,
                                    double floor,
                                    int *holds,
                                    struct LecamMeasure **nu);

// # Safety
// `m` must be NULL or a measure handle not yet freed.
void lecam_measure_free(struct LecamMeasure *m);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LECAM_H */
