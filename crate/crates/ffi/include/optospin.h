#ifndef OPTOSPIN_H
#define OPTOSPIN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every call.
typedef enum OptospinStatus {
  OPTOSPIN_STATUS_OK = 0,
  OPTOSPIN_STATUS_NULL_POINTER = 1,
  OPTOSPIN_STATUS_INVALID_UTF8 = 2,
  OPTOSPIN_STATUS_CONFIG = 3,
  OPTOSPIN_STATUS_INVALID_PARAMETER = 4,
  OPTOSPIN_STATUS_UNSTABLE = 5,
  OPTOSPIN_STATUS_NUMERICAL = 6,
  OPTOSPIN_STATUS_PANIC = 7,
} OptospinStatus;

// Opaque parameter set.
typedef struct OptospinParams OptospinParams;

// Rates in rad/s; cooperativities dimensionless.
typedef struct OptospinRates {
  double g_m;
  double g_at;
  double g_eff;
  double gamma_m_diff;
  double gamma_at_diff;
  double gamma_m_th;
  double gamma_at_cool;
  double omega_ol;
  double coop_c0;
  double coop_c;
} OptospinRates;

// Steady-state occupations of the two modes.
typedef struct OptospinOccupations {
  double mechanics;
  double spin;
} OptospinOccupations;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses TOML text into a new parameter handle.
//
// # Safety
// `toml` must be a valid NUL-terminated string and `out` a valid pointer.
// The handle written to `out` must be released with [`optospin_params_free`].
enum OptospinStatus optospin_params_from_toml(const char *toml, struct OptospinParams **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `params` must come from [`optospin_params_from_toml`] and not be used afterwards.
void optospin_params_free(struct OptospinParams *params);

// Sets the laser operating point (W, rad/s, m).
//
// # Safety
// `params` must be a live handle.
enum OptospinStatus optospin_params_set_operating_point(struct OptospinParams *params,
                                                        double power_w,
                                                        double detuning,
                                                        double waist_w0);

// Computes every rate at the handle's operating point.
//
// # Safety
// `params` must be a live handle and `out` a valid pointer.
enum OptospinStatus optospin_compute_rates(const struct OptospinParams *params,
                                           struct OptospinRates *out);

// Gaussian steady state with the full quadrature coupling at resonance.
// A negative `g_eff` or `gamma_at_cool` keeps the value computed from the parameters.
//
// # Safety
// `params` must be a live handle and `out` a valid pointer.
enum OptospinStatus optospin_steady_state(const struct OptospinParams *params,
                                          double g_eff,
                                          double gamma_at_cool,
                                          struct OptospinOccupations *out);

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next call on the same thread.
const char *optospin_last_error(void);

// Library version as a static NUL-terminated string.
const char *optospin_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPTOSPIN_H */
