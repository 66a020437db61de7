#ifndef RANKMF_H
#define RANKMF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RankmfCompression {
  RANKMF_COMPRESSION_NONE = 0,
  RANKMF_COMPRESSION_BLR = 1,
  RANKMF_COMPRESSION_HODLR = 2,
} RankmfCompression;

typedef enum RankmfModel {
  RANKMF_MODEL_POISSON2D = 0,
  RANKMF_MODEL_POISSON3D = 1,
} RankmfModel;

typedef enum RankmfStatus {
  RANKMF_STATUS_OK = 0,
  RANKMF_STATUS_NULL_POINTER = 1,
  RANKMF_STATUS_INVALID_ARGUMENT = 2,
  RANKMF_STATUS_PARSE = 3,
  RANKMF_STATUS_DIMENSION = 4,
  RANKMF_STATUS_SINGULAR = 5,
  RANKMF_STATUS_NOT_CONVERGED = 6,
  RANKMF_STATUS_INTERNAL = 7,
} RankmfStatus;

// Opaque factorization.
typedef struct RankmfFactor RankmfFactor;

// Opaque sparse matrix.
typedef struct RankmfMatrix RankmfMatrix;

typedef struct RankmfPolicy {
  enum RankmfCompression compression;
  double tol;
  // Fronts smaller than this stay dense.
  size_t threshold_dense;
  size_t tile;
  size_t leaf_size;
  double eta;
  uint64_t seed;
} RankmfPolicy;

typedef struct RankmfGmresResult {
  size_t iterations;
  size_t restarts;
  double relative_residual;
  bool converged;
} RankmfGmresResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The
// pointer stays valid until the next rankmf call on the same thread.
const char *rankmf_last_error(void);

// Static, NUL-terminated crate version.
const char *rankmf_version(void);

struct RankmfPolicy rankmf_policy_default(void);

// Builds a matrix from CSC arrays (row indices strictly increasing
// per column, no explicit zeros). The arrays are copied.
//
// # Safety
// `col_starts` must hold `n_cols + 1` entries and `row_indices` and
// `values` `col_starts[n_cols]` entries each.
enum RankmfStatus rankmf_matrix_from_csc(size_t n_rows,
                                         size_t n_cols,
                                         const size_t *col_starts,
                                         const size_t *row_indices,
                                         const double *values,
                                         struct RankmfMatrix **out);

// Parses a real MatrixMarket coordinate file held in memory.
//
// # Safety
// `text` must point to `len` readable bytes.
enum RankmfStatus rankmf_matrix_from_matrix_market(const uint8_t *text,
                                                   size_t len,
                                                   struct RankmfMatrix **out);

// Finite-difference Laplacian on a k×k (or k×k×k) lattice; the
// lattice coordinates are kept for geometric ordering.
//
// # Safety
// `out` must be null or writable.
enum RankmfStatus rankmf_matrix_model(enum RankmfModel kind, size_t k, struct RankmfMatrix **out);

// # Safety
// `m` must be a live matrix handle; the out pointers may be null.
enum RankmfStatus rankmf_matrix_shape(const struct RankmfMatrix *m,
                                      size_t *n_rows,
                                      size_t *n_cols,
                                      size_t *nnz);

// `y = A x`.
//
// # Safety
// `x` must hold `n_cols` and `y` `n_rows` doubles.
enum RankmfStatus rankmf_matrix_matvec(const struct RankmfMatrix *m, const double *x, double *y);

// # Safety
// `m` must be null or a handle not yet freed.
void rankmf_matrix_free(struct RankmfMatrix *m);

// Equilibrates, orders and factors `m`. A null policy means the
// defaults from `rankmf_policy_default`.
//
// # Safety
// `m` must be a live matrix handle and `out` writable.
enum RankmfStatus rankmf_factorize(const struct RankmfMatrix *m,
                                   const struct RankmfPolicy *policy,
                                   struct RankmfFactor **out);

// Stored factor entries.
//
// # Safety
// `f` must be a live factor handle.
size_t rankmf_factor_entries(const struct RankmfFactor *f);

// Solves with the factors; `x` and `b` may alias.
//
// # Safety
// `b` and `x` must hold `n` doubles, `n` the factored dimension.
enum RankmfStatus rankmf_factor_solve(const struct RankmfFactor *f,
                                      const double *b,
                                      double *x,
                                      size_t n);

// Right-preconditioned restarted GMRES on `m` with `f` as the
// preconditioner. Returns `NotConverged` (with `x` holding the last
// iterate) when `max_iters` runs out.
//
// # Safety
// Handles must be live; `b` and `x` hold `n` doubles; `result` may be
// null.
enum RankmfStatus rankmf_gmres(const struct RankmfMatrix *m,
                               const struct RankmfFactor *f,
                               const double *b,
                               double *x,
                               size_t n,
                               double tol,
                               size_t restart,
                               size_t max_iters,
                               struct RankmfGmresResult *result);

// # Safety
// `f` must be null or a handle not yet freed.
void rankmf_factor_free(struct RankmfFactor *f);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RANKMF_H */
