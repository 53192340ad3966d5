#ifndef CELSIM_H
#define CELSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of a C ABI call.
typedef enum CelStatus {
  CEL_STATUS_OK = 0,
  CEL_STATUS_NULL_POINTER = 1,
  CEL_STATUS_INVALID_ARGUMENT = 2,
  CEL_STATUS_INVALID_PARAMS = 3,
  CEL_STATUS_CONFIG = 4,
  CEL_STATUS_UNSTABLE = 5,
  CEL_STATUS_SOLVER = 6,
  CEL_STATUS_IO = 7,
  CEL_STATUS_PANIC = 8,
} CelStatus;

// Which probe Hamiltonian prefactors to use for transmission.
typedef enum CelProbeConvention {
  CEL_PROBE_CONVENTION_HALF_PREFACTORS = 0,
  CEL_PROBE_CONVENTION_UNIT_PREFACTORS = 1,
} CelProbeConvention;

// Opaque parameter set.
typedef struct CelParams CelParams;

// Reduced-model steady state.
typedef struct CelSteadyPhotons {
  double n1;
  double n2;
  double c_re;
  double c_im;
  // Largest real part of the moment-block spectrum, Hz (negative when stable).
  double abscissa_hz;
} CelSteadyPhotons;

// Full master-equation steady state.
typedef struct CelFullSteady {
  double n1;
  double n2;
  double c_re;
  double c_im;
  double rho_gg;
  double rho_ee;
  double rho_dd;
  // Residual of the linear solve, |L·ρ|.
  double residual;
} CelFullSteady;

// Drift and diffusion coefficients of the phase Fokker–Planck equation, in s⁻¹.
typedef struct CelDiffusion {
  double d_theta;
  double d_eta;
  double d_thetatheta;
  double d_etaeta;
  double d_thetaeta;
} CelDiffusion;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or NULL if none.
// The pointer stays valid until the next failing call on the same thread.
const char *cel_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *cel_version(void);

// New handle holding the default working point. Free with `cel_params_free`.
struct CelParams *cel_params_new_default(void);

// Load a parameter file (`key = value`, Hz) into a new handle.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable pointer.
enum CelStatus cel_params_load(const char *path, struct CelParams **out);

// Release a handle. NULL is ignored.
//
// # Safety
// `p` must be NULL or a handle not yet freed.
void cel_params_free(struct CelParams *p);

// Set a parameter by its file key (`Omega`, `kappa1`, …) in file units.
// The handle is unchanged if the result would be invalid.
//
// # Safety
// `p` must be a live handle and `key` a NUL-terminated string.
enum CelStatus cel_params_set(struct CelParams *p, const char *key, double value);

// Read a parameter by its file key in file units.
//
// # Safety
// `p` must be a live handle, `key` a NUL-terminated string and `out` writable.
enum CelStatus cel_params_get(const struct CelParams *p, const char *key, double *out);

// Steady state of the reduced moment model.
//
// # Safety
// `p` must be a live handle and `out` writable.
enum CelStatus cel_steady_photons(const struct CelParams *p, struct CelSteadyPhotons *out);

// Steady state of the full master equation with Fock cutoffs `n1_max`, `n2_max`.
//
// # Safety
// `p` must be a live handle and `out` writable.
enum CelStatus cel_full_steady(const struct CelParams *p,
                               size_t n1_max,
                               size_t n2_max,
                               struct CelFullSteady *out);

// Phase drift and diffusion coefficients at amplitudes `r1`, `r2` and
// phases `eta`, `theta`.
//
// # Safety
// `p` must be a live handle and `out` writable.
enum CelStatus cel_diffusion(const struct CelParams *p,
                             double r1,
                             double r2,
                             double eta,
                             double theta,
                             struct CelDiffusion *out);

// Entanglement witness Var(u) + Var(v) from the vacuum on `len` equally
// spaced times in [0, t_end] seconds, written to `values`.
//
// # Safety
// `p` must be a live handle and `values` must point to `len` writable doubles.
enum CelStatus cel_duan_trajectory(const struct CelParams *p,
                                   double t_end,
                                   double *values,
                                   size_t len);

// Complex transmission of mode 2 probed at `omega_d_hz` with mean probe
// photon number `n_probe`, on Fock cutoff `n2_max`.
//
// # Safety
// `p` must be a live handle; `re` and `im` must be writable.
enum CelStatus cel_transmission(const struct CelParams *p,
                                double omega_d_hz,
                                double n_probe,
                                size_t n2_max,
                                enum CelProbeConvention convention,
                                double *re,
                                double *im);

// Intracavity photon number from emitted power in dBm.
//
// # Safety
// `out` must be writable.
enum CelStatus cel_photons_from_power(double power_dbm,
                                      double omega_hz,
                                      double kappa_hz,
                                      double *out);

// Schawlow–Townes linewidth (κ₁ + κ₂)/(2 N_tot), all in Hz.
//
// # Safety
// `out` must be writable.
enum CelStatus cel_schawlow_townes(double kappa1_hz, double kappa2_hz, double n_tot, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CELSIM_H */
