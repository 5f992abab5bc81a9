#ifndef FLATLAB_H
#define FLATLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum FlStatus {
  FL_STATUS_OK = 0,
  FL_STATUS_NULL_POINTER = 1,
  FL_STATUS_INVALID_INPUT = 2,
  FL_STATUS_BUDGET = 3,
  FL_STATUS_INTERNAL = 4,
} FlStatus;

typedef enum FlMode {
  FL_MODE_EXACT = 0,
  FL_MODE_FLOAT = 1,
} FlMode;

/**
 * Opaque polynomial handle.
 */
typedef struct FlPolynomial FlPolynomial;

/**
 * Diagnostics report with every quantity rounded to `double`.
 */
typedef struct FlReport {
  size_t m;
  size_t n;
  double l;
  double a;
  double b;
  double r;
  double c;
  double c_over_m2;
  double l2_over_c;
  /**
   * True when the values were computed in exact arithmetic.
   */
  bool exact;
  bool degenerate;
} FlReport;

typedef struct FlFlatness {
  size_t grid_size;
  double l1_abs;
  double l1_sq;
  double sup_dev;
  double near_one_fraction;
} FlFlatness;

typedef struct FlMonteCarloConfig {
  uint64_t r;
  double epsilon;
  size_t samples;
  uint64_t seed;
  size_t grid_factor;
  double confidence;
} FlMonteCarloConfig;

typedef struct FlMonteCarloResult {
  double estimate;
  double ci_low;
  double ci_high;
  double mean_l1;
  size_t samples_used;
} FlMonteCarloResult;

typedef struct FlLambda {
  /**
   * Exact value, or 0 when the node budget ran out.
   */
  size_t lambda;
  size_t lower;
  size_t upper;
  bool complete;
  uint64_t nodes;
} FlLambda;

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next library call on the same thread.
 */
const char *fl_last_error(void);

/**
 * Builds a polynomial from `len` strictly increasing exponents. With
 * `weight_num` and `weight_den` both null the weights are uniform;
 * otherwise weight `i` is `weight_num[i] / weight_den[i]` and the weights
 * must sum to 1.
 *
 * # Safety
 * Non-null array arguments must point to `len` readable elements and `out`
 * must be writable.
 */
enum FlStatus fl_polynomial_new(const uint64_t *exponents,
                                const int64_t *weight_num,
                                const int64_t *weight_den,
                                size_t len,
                                struct FlPolynomial **out);

/**
 * Parses `{"exponents": [...], "weights": ["p/q", ...]}` (weights optional).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum FlStatus fl_polynomial_from_json(const char *json, struct FlPolynomial **out);

/**
 * Dirichlet polynomial of length `m`.
 *
 * # Safety
 * `out` must be writable.
 */
enum FlStatus fl_polynomial_dirichlet(uint64_t m, struct FlPolynomial **out);

/**
 * Two-block polynomial on `{0..j-1} ∪ {j, 2j, ..., j^2}`.
 *
 * # Safety
 * `out` must be writable.
 */
enum FlStatus fl_polynomial_two_block(uint64_t j, struct FlPolynomial **out);

/**
 * Class-B polynomial on the `2R`-element cover of `[1, R^2]`.
 *
 * # Safety
 * `out` must be writable.
 */
enum FlStatus fl_polynomial_lambda_cover(uint64_t r, struct FlPolynomial **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `p` must come from this library and not be used afterwards.
 */
void fl_polynomial_free(struct FlPolynomial *p);

/**
 * Number of terms, or 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a live handle.
 */
size_t fl_polynomial_len(const struct FlPolynomial *p);

/**
 * Degree, or 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a live handle.
 */
uint64_t fl_polynomial_degree(const struct FlPolynomial *p);

/**
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum FlStatus fl_report(const struct FlPolynomial *p, enum FlMode mode, struct FlReport *out);

/**
 * Report as JSON; exact values appear as `"num/den"` strings. Free the
 * result with [`fl_string_free`].
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum FlStatus fl_report_json(const struct FlPolynomial *p, enum FlMode mode, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void fl_string_free(char *s);

/**
 * Flatness metrics on `grid_size` points (0 picks `4 (deg + 1)`).
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum FlStatus fl_flatness(const struct FlPolynomial *p, size_t grid_size, struct FlFlatness *out);

/**
 * Config with the library defaults.
 */
struct FlMonteCarloConfig fl_montecarlo_config_default(uint64_t r,
                                                       double epsilon,
                                                       size_t samples,
                                                       uint64_t seed);

/**
 * Hoeffding-interval estimate of `E(epsilon, R)`.
 *
 * # Safety
 * `cfg` must be readable and `out` writable.
 */
enum FlStatus fl_montecarlo(const struct FlMonteCarloConfig *cfg, struct FlMonteCarloResult *out);

/**
 * Exact `lambda(R)` with `budget` search nodes (0 for none). The witness is
 * copied into `witness` when it fits in `witness_cap` elements; its length
 * always goes to `witness_len`.
 *
 * # Safety
 * `out` and `witness_len` must be writable; `witness` must be null or hold
 * `witness_cap` elements.
 */
enum FlStatus fl_lambda_exact(uint64_t r,
                              uint64_t budget,
                              struct FlLambda *out,
                              uint64_t *witness,
                              size_t witness_cap,
                              size_t *witness_len);

#endif  /* FLATLAB_H */
