#ifndef FLUXSPEC_H
#define FLUXSPEC_H

/* Generated by cbindgen from the fluxspec-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum {
  FS_STATUS_OK = 0,
  FS_STATUS_INVALID_ARGUMENT = 1,
  FS_STATUS_GEOMETRY_INFEASIBLE = 2,
  FS_STATUS_HOLE_TOUCHES_BOUNDARY = 3,
  FS_STATUS_MESH_ERROR = 4,
  FS_STATUS_ASSEMBLY_INTEGRITY = 5,
  FS_STATUS_CONVERGENCE_FAILURE = 6,
  FS_STATUS_ORACLE_FAILURE = 7,
  FS_STATUS_INVARIANT_VIOLATION = 8,
  FS_STATUS_IO_ERROR = 9,
  FS_STATUS_NULL_POINTER = 10,
  FS_STATUS_PANIC = 11,
} FsStatus;

/**
 * Inner boundary condition of the perforated problems.
 */
typedef enum {
  FS_INNER_BC_DIRICHLET = 0,
  FS_INNER_BC_NEUMANN = 1,
} FsInnerBc;

/**
 * Problem kind of the two-dimensional solves.
 */
typedef enum {
  FS_PROBLEM_KIND_PERFORATED_DIRICHLET_INNER = 0,
  FS_PROBLEM_KIND_PERFORATED_NEUMANN_INNER = 1,
  FS_PROBLEM_KIND_PUNCTURED_FRIEDRICHS = 2,
  FS_PROBLEM_KIND_LOCALIZED_FIELD = 3,
} FsProblemKind;

/**
 * Opaque perforated-domain handle.
 */
typedef struct FsDomain FsDomain;

/**
 * A flux value with its canonical fold into [0, 1/2].
 */
typedef struct {
  double raw;
  double reduced;
  int64_t mode_shift;
  /**
   * 1 when the fold used evenness.
   */
  uint8_t sign_flipped;
} FsFlux;

/**
 * Result of a two-dimensional eigenvalue solve.
 */
typedef struct {
  double lambda;
  /**
   * Algebraic residual of the returned pair.
   */
  double residual;
  /**
   * Discretization error estimate from one refinement step.
   */
  double est_error;
  uintptr_t iterations;
} FsEigenResult;

/**
 * Trial-state certificate of a domain against its matched annulus.
 */
typedef struct {
  /**
   * Rayleigh quotient of the radial trial state on the domain.
   */
  double rq;
  /**
   * Matched-annulus eigenvalue.
   */
  double lambda_annulus;
  double mass_gap;
  double energy_gap;
  double rq_error;
  /**
   * 1 when rq ≤ lambda_annulus within tolerance.
   */
  uint8_t upper_bound_ok;
} FsCertificate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the most recent error message of this thread into `buf`
 * (NUL-terminated, truncated to `cap`). Returns the full message length in
 * bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must point to at least `cap` writable bytes, or be null (then only
 * the length is returned).
 */
uintptr_t fs_last_error(char *buf, uintptr_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fs_version(void);

/**
 * Fold a flux into the canonical interval [0, 1/2].
 *
 * # Safety
 * `out` must be a valid pointer.
 */
FsStatus fs_flux_reduce(double phi, FsFlux *out);

/**
 * Parse a domain from its JSON description.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be valid. The
 * returned handle must be released with [`fs_domain_free`].
 */
FsStatus fs_domain_from_json(const char *json, FsDomain **out);

/**
 * Annulus whose outer circle is offset by `delta` from the hole center.
 *
 * # Safety
 * `out` must be valid; release the handle with [`fs_domain_free`].
 */
FsStatus fs_domain_eccentric(double r0, double r1, double delta, FsDomain **out);

/**
 * Perturbed disk with cosine/sine coefficient arrays; with `renormalize`
 * nonzero the outer area is matched to `π r1²` exactly.
 *
 * # Safety
 * `cos`/`sin` must point to `n_cos`/`n_sin` doubles (null allowed when the
 * count is 0); `out` must be valid.
 */
FsStatus fs_domain_perturbed_disk(double r1,
                                  double r0,
                                  const double *cos,
                                  uintptr_t n_cos,
                                  const double *sin,
                                  uintptr_t n_sin,
                                  uint8_t renormalize,
                                  FsDomain **out);

/**
 * Release a domain handle. Null is ignored.
 *
 * # Safety
 * `dom` must be a handle from this library, not yet freed.
 */
void fs_domain_free(FsDomain *dom);

/**
 * Area enclosed by the outer boundary, exact from the representation.
 *
 * # Safety
 * `dom` must be a live handle; `out` must be valid.
 */
FsStatus fs_domain_outer_area(const FsDomain *dom, double *out);

/**
 * Radii of the area-matched concentric annulus.
 *
 * # Safety
 * `dom` must be a live handle; `out_r0`, `out_r1` must be valid.
 */
FsStatus fs_domain_matched_annulus(const FsDomain *dom, double *out_r0, double *out_r1);

/**
 * Lowest eigenvalue of the annulus over the angular-mode window.
 *
 * # Safety
 * `out_lambda` must be valid; `out_est_error` and `out_mode` may be null.
 */
FsStatus fs_annulus_eigenvalue(double r0,
                               double r1,
                               double phi,
                               FsInnerBc bc,
                               uintptr_t n_elements,
                               int64_t m_window,
                               double *out_lambda,
                               double *out_est_error,
                               int64_t *out_mode);

/**
 * Closed-form eigenvalue of the annulus at reduced flux 1/2.
 *
 * # Safety
 * `out` must be valid.
 */
FsStatus fs_halfflux_oracle(double r0, double r1, FsInnerBc bc, double *out);

/**
 * Bessel cross-product eigenvalue of the annulus at zero flux
 * (Dirichlet inner, Neumann outer).
 *
 * # Safety
 * `out` must be valid.
 */
FsStatus fs_zero_flux_oracle(double r0, double r1, double *out);

/**
 * Shrinking-hole limit eigenvalue of the disk at reduced flux 1/2.
 *
 * # Safety
 * `out` must be valid.
 */
FsStatus fs_disk_halfflux_oracle(double r1, double *out);

/**
 * Two-dimensional eigenvalue solve on a domain. `core_radius` is consumed
 * only by the punctured kind (pass 0 otherwise); the error estimate comes
 * from a half-resolution companion solve.
 *
 * # Safety
 * `dom` must be a live handle; `out` must be valid.
 */
FsStatus fs_planar_eigenvalue(const FsDomain *dom,
                              double phi,
                              FsProblemKind kind,
                              uintptr_t n_s,
                              uintptr_t n_t,
                              double core_radius,
                              double tol,
                              FsEigenResult *out);

/**
 * Trial-state certificate of a domain against its matched annulus.
 *
 * # Safety
 * `dom` must be a live handle; `out` must be valid.
 */
FsStatus fs_certificate(const FsDomain *dom,
                        double phi,
                        FsInnerBc bc,
                        uintptr_t profile_elements,
                        uintptr_t quad_n,
                        FsCertificate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLUXSPEC_H */
