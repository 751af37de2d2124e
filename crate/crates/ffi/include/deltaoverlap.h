/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef DELTAOVERLAP_H
#define DELTAOVERLAP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum DovStatus {
  DOV_STATUS_OK = 0,
  // An argument violates a precondition (for example `N > K`).
  DOV_STATUS_INVALID_ARGUMENT = 1,
  // Parameters outside the supported regime, such as an attractive
  // coupling too weak to bind in the given box.
  DOV_STATUS_REGIME = 2,
  // Root finding, quadrature, a determinant or a series failed.
  DOV_STATUS_NUMERICAL = 3,
  // A required pointer argument was null.
  DOV_STATUS_NULL_POINTER = 4,
  // An internal panic was caught.
  DOV_STATUS_PANIC = 5,
} DovStatus;

// Route used by [`dov_overlap`].
typedef enum DovMethod {
  DOV_METHOD_DIRECT = 0,
  DOV_METHOD_PRODUCT = 1,
  DOV_METHOD_TRACE_SERIES = 2,
} DovMethod;

// Coupling, box length and Fermi energy.
typedef struct DovModel DovModel;

// Solved s-wave spectra of the free and perturbed operators.
typedef struct DovSpectrum DovSpectrum;

// Value returned by [`dov_overlap`].
typedef struct DovOverlap {
  // `ln |S_L^N|²`
  double log_overlap_sq;
  // Truncation error bound (zero for the direct route).
  double tail_bound;
  size_t particles;
  size_t truncation;
  enum DovMethod method;
} DovOverlap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null if none failed.
// The string stays valid until the next failing call on the same thread.
const char *dov_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *dov_version(void);

// Creates a model. Attractive couplings need `4π|alpha|·length > 1`.
//
// # Safety
// `out` must be valid for writing a pointer. The handle written there must
// be released with [`dov_model_free`].
enum DovStatus dov_model_new(double alpha, double length, double energy, struct DovModel **out);

// Releases a model; null is ignored.
//
// # Safety
// `model` must be null or a handle from [`dov_model_new`] not yet freed.
void dov_model_free(struct DovModel *model);

// Default particle number `⌊√E·L/π⌋` of the model.
//
// # Safety
// `model` must be a live handle and `out` valid for writing.
enum DovStatus dov_model_default_particles(const struct DovModel *model, size_t *out);

// `ln |S_L^N|²` of the model with `particles` fermions.
//
// `truncation` is the number of perturbed levels `K > N` used by the
// product and trace routes and `terms` the number of trace-series terms;
// both are ignored by the direct route.
//
// # Safety
// `model` must be a live handle and `out` valid for writing.
enum DovStatus dov_overlap(const struct DovModel *model,
                           enum DovMethod method,
                           size_t particles,
                           size_t truncation,
                           size_t terms,
                           struct DovOverlap *out);

// Scattering phase shift `δ_α(k)` for `k > 0`.
//
// # Safety
// `out` must be valid for writing.
enum DovStatus dov_phase_shift(double k, double alpha, double *out);

// Decay exponent `ζ(E) = δ_α(√E)²/π²`.
//
// # Safety
// `out` must be valid for writing.
enum DovStatus dov_zeta(double energy, double alpha, double *out);

// The weaker exponent `γ(E)`, equal to `ζ(E)` when `δ_α(√E) ≤ π/2`.
//
// # Safety
// `out` must be valid for writing.
enum DovStatus dov_gamma(double energy, double alpha, double *out);

// Solves levels `1..=modes` of both operators.
//
// # Safety
// `out` must be valid for writing a pointer. The handle must be released
// with [`dov_spectrum_free`].
enum DovStatus dov_spectrum_solve(double alpha,
                                  double length,
                                  size_t modes,
                                  struct DovSpectrum **out);

// Releases a spectrum; null is ignored.
//
// # Safety
// `spectrum` must be null or a handle from [`dov_spectrum_solve`] not yet
// freed.
void dov_spectrum_free(struct DovSpectrum *spectrum);

// Number of solved levels; 0 for a null handle.
//
// # Safety
// `spectrum` must be null or a live handle.
size_t dov_spectrum_len(const struct DovSpectrum *spectrum);

// Level `n` (1-based): free eigenvalue `λ_n` and perturbed eigenvalue `μ_n`
// (negative for the bound state).
//
// # Safety
// `spectrum` must be a live handle; `lambda` and `mu` valid for writing.
enum DovStatus dov_spectrum_level(const struct DovSpectrum *spectrum,
                                  size_t n,
                                  double *lambda,
                                  double *mu);

// Closed-form overlap `⟨φ_j, ψ_k⟩` of normalised eigenfunctions.
//
// # Safety
// `spectrum` must be a live handle and `out` valid for writing.
enum DovStatus dov_spectrum_overlap_entry(const struct DovSpectrum *spectrum,
                                          size_t j,
                                          size_t k,
                                          double *out);

// `|det ⟨φ_j, ψ_k⟩|²` over the top `n` eigenvectors of a random pair
// `(A, A + φφᵀ)` generated from `seed`, by eigenvectors (`by_eigenvalues`
// = 0) or by the eigenvalue-only product (`by_eigenvalues` ≠ 0).
//
// # Safety
// `out` must be valid for writing.
enum DovStatus dov_random_pair_overlap(size_t dimension,
                                       uint64_t seed,
                                       size_t n,
                                       int32_t by_eigenvalues,
                                       double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DELTAOVERLAP_H */
