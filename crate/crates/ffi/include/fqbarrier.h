#ifndef FQBARRIER_H
#define FQBARRIER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FqbStatus {
  FQB_STATUS_OK = 0,
  FQB_STATUS_NULL_POINTER = 1,
  FQB_STATUS_INVALID_ARGUMENT = 2,
  FQB_STATUS_NO_CONVERGENCE = 3,
  FQB_STATUS_DIMENSION_MISMATCH = 4,
  FQB_STATUS_NUMERICAL_FAILURE = 5,
  FQB_STATUS_UNSUPPORTED = 6,
  FQB_STATUS_IO = 7,
  FQB_STATUS_PARSE = 8,
  FQB_STATUS_BUFFER_TOO_SMALL = 9,
  FQB_STATUS_PANIC = 10,
} FqbStatus;

typedef enum FqbModelKind {
  FQB_MODEL_KIND_BLACK_SCHOLES = 0,
  FQB_MODEL_KIND_PSEUDO_CEV = 1,
} FqbModelKind;

typedef enum FqbBarrier {
  FQB_BARRIER_UP_AND_OUT = 0,
  FQB_BARRIER_DOWN_AND_OUT = 1,
} FqbBarrier;

typedef enum FqbPayoff {
  FQB_PAYOFF_CALL = 0,
  FQB_PAYOFF_PUT = 1,
} FqbPayoff;

typedef enum FqbEstimator {
  FQB_ESTIMATOR_INDICATOR = 0,
  FQB_ESTIMATOR_CONDITIONAL = 1,
} FqbEstimator;

/**
 * Opaque quantized price chain.
 */
typedef struct FqbChain FqbChain;

/**
 * Model parameters; `sigma` is read for Black-Scholes, `vartheta` and
 * `delta` for pseudo-CEV.
 */
typedef struct FqbModel {
  enum FqbModelKind kind;
  double r;
  double sigma;
  double vartheta;
  double delta;
  double x0;
} FqbModel;

typedef struct FqbContract {
  enum FqbBarrier barrier_type;
  enum FqbPayoff payoff;
  double strike;
  double barrier;
  double maturity;
} FqbContract;

typedef struct FqbQuantPrice {
  double call;
  double put;
  double survival;
  double elapsed;
} FqbQuantPrice;

typedef struct FqbMcResult {
  double price;
  double sample_variance;
  double std_error;
  double elapsed;
} FqbMcResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next call into the library.
 */
const char *fqb_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fqb_version(void);

/**
 * Builds the price grids and transition matrices on `[0, horizon]` from
 * the optimal product quantizer of size at most `budget`.
 *
 * # Safety
 * `model` must point to a valid `FqbModel` and `out` to writable storage.
 */
enum FqbStatus fqb_chain_new(const struct FqbModel *model,
                             double horizon,
                             size_t n_steps,
                             size_t budget,
                             size_t substeps,
                             struct FqbChain **out);

/**
 * Releases a chain; null is ignored.
 *
 * # Safety
 * `chain` must come from `fqb_chain_new` and not be used afterwards.
 */
void fqb_chain_free(struct FqbChain *chain);

/**
 * Number of price levels per date, or 0 for a null handle.
 *
 * # Safety
 * `chain` must be null or a live handle.
 */
size_t fqb_chain_levels(const struct FqbChain *chain);

/**
 * Call and put prices of the contract by forward induction on the chain.
 *
 * # Safety
 * `chain` must be a live handle, `contract` valid and `out` writable.
 */
enum FqbStatus fqb_chain_price(const struct FqbChain *chain,
                               const struct FqbContract *contract,
                               struct FqbQuantPrice *out);

/**
 * Closed-form Black-Scholes knock-out price.
 *
 * # Safety
 * `model` and `contract` must be valid, `out` writable.
 */
enum FqbStatus fqb_closed_form(const struct FqbModel *model,
                               const struct FqbContract *contract,
                               double *out);

/**
 * Regular Brownian bridge Monte Carlo price.
 *
 * # Safety
 * `model` and `contract` must be valid, `out` writable.
 */
enum FqbStatus fqb_rbb_price(const struct FqbModel *model,
                             const struct FqbContract *contract,
                             size_t n_steps,
                             size_t n_paths,
                             uint64_t seed,
                             enum FqbEstimator estimator,
                             struct FqbMcResult *out);

/**
 * Optimal `levels`-point quantizer of N(0,1) written into caller buffers
 * of length at least `levels`. `weights` may be null.
 *
 * # Safety
 * `points` (and `weights` when not null) must hold `len` doubles.
 */
enum FqbStatus fqb_normal_quantizer(size_t levels,
                                    double *points,
                                    double *weights,
                                    size_t len,
                                    double *distortion);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FQBARRIER_H */
