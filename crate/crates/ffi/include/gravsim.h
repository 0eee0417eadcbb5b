#ifndef GRAVSIM_H
#define GRAVSIM_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GsStatus {
  GS_STATUS_OK = 0,
  GS_STATUS_NULL_POINTER = 1,
  GS_STATUS_INVALID_ARGUMENT = 2,
  GS_STATUS_INSUFFICIENT_DATA = 3,
  GS_STATUS_CONVERGENCE = 4,
  GS_STATUS_COVERAGE = 5,
  GS_STATUS_BUFFER_TOO_SMALL = 6,
  GS_STATUS_PANIC = 7,
} GsStatus;

typedef enum GsAllanMethod {
  GS_ALLAN_METHOD_NON_OVERLAPPING = 0,
  GS_ALLAN_METHOD_OVERLAPPING = 1,
} GsAllanMethod;

// Opaque simulated fringe scan.
typedef struct GsScan GsScan;

// Result of a fringe fit.
typedef struct GsGravityEstimate {
  double g_hat;
  double sigma_g;
  double beta_null;
  double offset;
  double amplitude;
  double fit_residual;
  uint32_t iterations;
} GsGravityEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the last error message of this thread into `buf` (NUL-terminated).
// Returns the message length without the terminator, 0 if there is none,
// or -1 if `buf` is null or too small.
//
// # Safety
// `buf` must be valid for writes of `len` bytes.
int64_t gs_last_error_message(char *buf, uintptr_t len);

// Library version as a static NUL-terminated string.
const char *gs_version(void);

// Excited-state probability after one square pulse from the ground state.
//
// # Safety
// `out` must be null or valid for a write.
enum GsStatus gs_pulse_excited_probability(double rabi,
                                           double detuning,
                                           double phase,
                                           double duration,
                                           double *out);

// Three-pulse fringe ½[1 − cos(Δφ − δτ_p/2)].
double gs_fringe_probability(double delta, double tau_p, double dphi_laser);

// Classical action of free fall between (z1, t1) and (z2, t2).
//
// # Safety
// `out` must be null or valid for a write.
enum GsStatus gs_classical_action(double z1,
                                  double t1,
                                  double z2,
                                  double t2,
                                  double mass,
                                  double g,
                                  double *out);

// |G(ω)| of the three-pulse sensitivity function.
//
// # Safety
// `out` must be null or valid for a write.
enum GsStatus gs_transfer_function(double interrogation_time,
                                   double tau_p,
                                   double omega,
                                   double *out);

// Simulate a chirp scan. `n_atoms = 0` records ideal probabilities. On
// success `*out` owns a new handle to release with [`gs_scan_free`].
//
// # Safety
// `betas` must point to `n` readable values; `out` must be valid for a write.
enum GsStatus gs_scan_simulate(const double *betas,
                               uintptr_t n,
                               double k_eff,
                               double g_true,
                               double interrogation_time,
                               double dphi_laser,
                               uint64_t n_atoms,
                               double phase_noise,
                               uint64_t seed,
                               struct GsScan **out);

// Number of points in a scan; 0 for a null handle.
//
// # Safety
// `scan` must be null or a live handle.
uintptr_t gs_scan_len(const struct GsScan *scan);

// Copy the measured excited fractions into `buf`.
//
// # Safety
// `scan` must be a live handle and `buf` valid for `len` writes.
enum GsStatus gs_scan_measured(const struct GsScan *scan, double *buf, uintptr_t len);

// Fit the scan and convert the fringe null to g.
//
// # Safety
// `scan` must be a live handle and `out` valid for a write.
enum GsStatus gs_scan_estimate_g(const struct GsScan *scan,
                                 double k_eff,
                                 double interrogation_time,
                                 struct GsGravityEstimate *out);

// Release a scan handle. Null is ignored.
//
// # Safety
// `scan` must be null or a handle not yet freed.
void gs_scan_free(struct GsScan *scan);

// Allan deviation of `samples` at each of `n_taus` averaging times.
// `adev_out[i]` is NaN and `blocks_out[i]` 0 where τ leaves fewer than two
// blocks; `tau_out[i]` receives τ snapped to a whole number of samples.
//
// # Safety
// Input pointers must be readable for their lengths, output pointers
// writable for `n_taus` values.
enum GsStatus gs_allan_deviation(const double *samples,
                                 uintptr_t n_samples,
                                 double dt,
                                 const double *taus,
                                 uintptr_t n_taus,
                                 enum GsAllanMethod method,
                                 double *tau_out,
                                 double *adev_out,
                                 uint64_t *blocks_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRAVSIM_H */
