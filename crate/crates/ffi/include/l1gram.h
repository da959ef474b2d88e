#ifndef L1GRAM_H
#define L1GRAM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum L1gCertificate {
  L1G_CERTIFICATE_HEURISTIC = 0,
  L1G_CERTIFICATE_CERTIFIED_BOUND = 1,
  L1G_CERTIFICATE_EXACT = 2,
} L1gCertificate;

typedef enum L1gStatus {
  L1G_STATUS_OK = 0,
  L1G_STATUS_NULL_POINTER = 1,
  L1G_STATUS_INVALID_ARGUMENT = 2,
  L1G_STATUS_NOT_SYMMETRIC = 3,
  L1G_STATUS_NOT_PSD = 4,
  L1G_STATUS_SINGULAR_PIVOT = 5,
  L1G_STATUS_NOT_CONVERGED = 6,
  L1G_STATUS_RECONSTRUCTION = 7,
  L1G_STATUS_TOO_LARGE = 8,
  L1G_STATUS_PARSE = 9,
  L1G_STATUS_IO = 10,
  L1G_STATUS_BUFFER_TOO_SMALL = 11,
  L1G_STATUS_PANIC = 12,
} L1gStatus;

typedef struct L1gDecomposition L1gDecomposition;

typedef struct L1gMatrix L1gMatrix;

typedef struct L1gReport L1gReport;

/*
 Numeric view of a bound report. Absent bounds are NaN.
 */
typedef struct L1gBounds {
  double lower;
  double upper;
  enum L1gCertificate certificate;
  /*
   Length of the vector witness, or 0 if there is none.
   */
  size_t witness_len;
} L1gBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null. Valid until the
 next failing call on the same thread.
 */
const char *l1g_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *l1g_version(void);

/*
 Releases a string returned by this library.

 # Safety
 `s` must come from this library or be null.
 */
void l1g_string_free(char *s);

/*
 Builds a matrix from `n * n` row-major values. Symmetry is checked.

 # Safety
 `data` must point to `n * n` readable doubles; `out` must be writable.
 */
enum L1gStatus l1g_matrix_new(size_t n, const double *data, struct L1gMatrix **out);

/*
 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum L1gStatus l1g_matrix_load(const char *path, struct L1gMatrix **out);

/*
 # Safety
 `m` must be a live handle; `path` a NUL-terminated string.
 */
enum L1gStatus l1g_matrix_save(const struct L1gMatrix *m, const char *path);

/*
 # Safety
 `m` must be a handle from this library or null; it is invalid afterwards.
 */
void l1g_matrix_free(struct L1gMatrix *m);

/*
 Dimension of `m`, or 0 for a null handle.

 # Safety
 `m` must be a live handle or null.
 */
size_t l1g_matrix_dim(const struct L1gMatrix *m);

/*
 Copies the `n * n` row-major entries into `buf`.

 # Safety
 `m` must be a live handle; `buf` must hold `len` doubles.
 */
enum L1gStatus l1g_matrix_copy(const struct L1gMatrix *m, double *buf, size_t len);

/*
 Sum of absolute entries.

 # Safety
 `m` must be a live handle; `out` must be writable.
 */
enum L1gStatus l1g_matrix_one_norm(const struct L1gMatrix *m, double *out);

/*
 Random hollow sign matrix of size `n` from `seed`.

 # Safety
 `out` must be writable.
 */
enum L1gStatus l1g_sample_w(size_t n, uint64_t seed, struct L1gMatrix **out);

/*
 The shifted sign matrix `-(sqrt n / 4) I + W`, with `W` as in [`l1g_sample_w`].

 # Safety
 `out` must be writable.
 */
enum L1gStatus l1g_build_t(size_t n, uint64_t seed, struct L1gMatrix **out);

/*
 Spectral decomposition into rank-one PSD terms.

 # Safety
 `m` must be a live handle; `out` must be writable.
 */
enum L1gStatus l1g_decompose_eigen(const struct L1gMatrix *m, struct L1gDecomposition **out);

/*
 Greedy peeling. `rule` uses the CLI spelling (`min_cost_per_trace`,
 `max_diagonal`, `fixed:2,0,1`, ...); null selects the default rule.

 # Safety
 `m` must be a live handle; `rule` null or NUL-terminated; `out` writable.
 */
enum L1gStatus l1g_decompose_peel(const struct L1gMatrix *m,
                                  const char *rule,
                                  struct L1gDecomposition **out);

/*
 # Safety
 `d` must be a handle from this library or null.
 */
void l1g_decomposition_free(struct L1gDecomposition *d);

/*
 Number of rank-one terms, or 0 for a null handle.

 # Safety
 `d` must be a live handle or null.
 */
size_t l1g_decomposition_len(const struct L1gDecomposition *d);

/*
 Sum of squared l1 norms of the terms.

 # Safety
 `d` must be a live handle; `out` writable.
 */
enum L1gStatus l1g_decomposition_cost(const struct L1gDecomposition *d, double *out);

/*
 Copies term `k` (length `n`) into `buf`.

 # Safety
 `d` must be a live handle; `buf` must hold `len` doubles.
 */
enum L1gStatus l1g_decomposition_vector(const struct L1gDecomposition *d,
                                        size_t k,
                                        double *buf,
                                        size_t len);

/*
 Max-entry error of the reconstruction against `m`.

 # Safety
 Both handles must be live; `out` writable.
 */
enum L1gStatus l1g_decomposition_error(const struct L1gDecomposition *d,
                                       const struct L1gMatrix *m,
                                       double *out);

/*
 # Safety
 `d` must be a live handle; `path` NUL-terminated.
 */
enum L1gStatus l1g_decomposition_save(const struct L1gDecomposition *d, const char *path);

/*
 Exact maximum of `x^T T x` over the l1 unit sphere, by enumeration.
 Refuses `n > n_cap`.

 # Safety
 `m` must be a live handle; `out` writable.
 */
enum L1gStatus l1g_rho1_exact(const struct L1gMatrix *m, size_t n_cap, struct L1gReport **out);

/*
 Heuristic lower bound on the same maximum by projected ascent.

 # Safety
 `m` must be a live handle; `out` writable.
 */
enum L1gStatus l1g_rho1_multistart(const struct L1gMatrix *m,
                                   size_t restarts,
                                   size_t steps,
                                   uint64_t seed,
                                   struct L1gReport **out);

/*
 Certified upper bound on `sup Tr(T A)` over PSD `A` with unit entrywise l1 norm.

 # Safety
 `m` must be a live handle; `out` writable.
 */
enum L1gStatus l1g_piplus_dual_upper(const struct L1gMatrix *m,
                                     double tol,
                                     size_t iter_cap,
                                     struct L1gReport **out);

/*
 Bounds on the PSD-to-rank-one ratio for the seeded sign matrix of size `n`.
 `mode` is `exact`, `structured` or `heuristic`.

 # Safety
 `mode` must be NUL-terminated; `out` writable.
 */
enum L1gStatus l1g_certify_ratio(size_t n,
                                 uint64_t seed,
                                 double c,
                                 const char *mode,
                                 struct L1gReport **out);

/*
 # Safety
 `r` must be a handle from this library or null.
 */
void l1g_report_free(struct L1gReport *r);

/*
 # Safety
 `r` must be a live handle; `out` writable.
 */
enum L1gStatus l1g_report_bounds(const struct L1gReport *r, struct L1gBounds *out);

/*
 Copies the vector witness into `buf`. Fails if the report has none.

 # Safety
 `r` must be a live handle; `buf` must hold `len` doubles.
 */
enum L1gStatus l1g_report_witness(const struct L1gReport *r, double *buf, size_t len);

/*
 JSON rendering of the report. Release with [`l1g_string_free`].

 # Safety
 `r` must be a live handle; `out` writable.
 */
enum L1gStatus l1g_report_json(const struct L1gReport *r, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* L1GRAM_H */
