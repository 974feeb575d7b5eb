#ifndef CVSEP_H
#define CVSEP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CvsepStatus {
  CVSEP_STATUS_OK = 0,
  CVSEP_STATUS_NULL_POINTER = 1,
  CVSEP_STATUS_INVALID_ARGUMENT = 2,
  CVSEP_STATUS_NOT_PHYSICAL = 3,
  CVSEP_STATUS_SINGULAR = 4,
  CVSEP_STATUS_NO_CONVERGENCE = 5,
  CVSEP_STATUS_UNSUPPORTED = 6,
  CVSEP_STATUS_INTERNAL = 7,
} CvsepStatus;

/**
 * Validated covariance matrix.
 */
typedef struct CvsepCovariance CvsepCovariance;

/**
 * Fock-basis detect operator elements.
 */
typedef struct CvsepFockOperator CvsepFockOperator;

/**
 * A separability verdict. `entangled` is true when `margin` is below the
 * classification tolerance.
 */
typedef struct CvsepVerdict {
  double margin;
  bool entangled;
} CvsepVerdict;

/**
 * Outcome of an alternating maximization run.
 */
typedef struct CvsepAlternation {
  double m0;
  size_t rounds;
  bool converged;
} CvsepAlternation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library on this thread.
 */
const char *cvsep_last_error(void);

/**
 * Builds a covariance matrix from `dim * dim` row-major entries.
 *
 * # Safety
 * `data` must point to `dim * dim` readable doubles and `out` must be writable.
 */
enum CvsepStatus cvsep_cm_new(const double *data, size_t dim, struct CvsepCovariance **out);

/**
 * # Safety
 * `cm` must be null or a handle from [`cvsep_cm_new`] not yet freed.
 */
void cvsep_cm_free(struct CvsepCovariance *cm);

/**
 * # Safety
 * `cm` must be a live handle and `out` writable.
 */
enum CvsepStatus cvsep_cm_modes(const struct CvsepCovariance *cm, size_t *out);

/**
 * Smallest symplectic eigenvalue of the partial transpose with the first
 * `modes_a` modes on one side. Values below 1 signal entanglement.
 *
 * # Safety
 * `cm` must be a live handle and `out` writable.
 */
enum CvsepStatus cvsep_ppt_min_symplectic(const struct CvsepCovariance *cm,
                                          size_t modes_a,
                                          double *out);

/**
 * Simon criterion for a two-mode state.
 *
 * # Safety
 * `cm` must be a live two-mode handle and `out` writable.
 */
enum CvsepStatus cvsep_simon(const struct CvsepCovariance *cm, struct CvsepVerdict *out);

/**
 * Closed-form criterion for squeezed thermal states with local variances
 * `a`, `b` and correlation `c`.
 *
 * # Safety
 * `out` must be writable.
 */
enum CvsepStatus cvsep_squeezed_thermal(double a, double b, double c, struct CvsepVerdict *out);

/**
 * Minimum witness ratio over Gaussian detect operators; below 1 means
 * entangled.
 *
 * # Safety
 * `cm` must be a live two-mode handle and `out` writable.
 */
enum CvsepStatus cvsep_witness_ratio(const struct CvsepCovariance *cm, double *out);

/**
 * Separability verdict for a photon-added and -subtracted two-mode
 * Gaussian state. `adds` and `subs` hold one count per mode.
 *
 * # Safety
 * `kernel` must be a live two-mode handle, `adds` and `subs` must point to
 * two readable values each and `out` must be writable.
 */
enum CvsepStatus cvsep_photon_added(const struct CvsepCovariance *kernel,
                                    const uint32_t *adds,
                                    const uint32_t *subs,
                                    struct CvsepVerdict *out);

/**
 * Fock-basis elements of the detect operator with six parameters
 * `(m1..m6)`, truncated at `cutoff` levels per mode.
 *
 * # Safety
 * `detect` must point to six readable doubles and `out` must be writable.
 */
enum CvsepStatus cvsep_fock_new(const double *detect,
                                size_t cutoff,
                                struct CvsepFockOperator **out);

/**
 * # Safety
 * `op` must be null or a handle from [`cvsep_fock_new`] not yet freed.
 */
void cvsep_fock_free(struct CvsepFockOperator *op);

/**
 * Alternating maximization of the product-state expectation, started from
 * a random state drawn with `seed`.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum CvsepStatus cvsep_fock_alternate_maximize(const struct CvsepFockOperator *op,
                                               uint64_t seed,
                                               size_t max_rounds,
                                               struct CvsepAlternation *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CVSEP_H */
