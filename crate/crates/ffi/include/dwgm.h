#ifndef DWGM_H
#define DWGM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  DWGM_STATUS_OK = 0,
  DWGM_STATUS_NULL_POINTER = 1,
  DWGM_STATUS_DOMAIN = 2,
  DWGM_STATUS_SHAPE = 3,
  DWGM_STATUS_PARSE = 4,
  DWGM_STATUS_NUMERIC = 5,
  DWGM_STATUS_CONFIG = 6,
  DWGM_STATUS_INPUT = 7,
  DWGM_STATUS_IO = 8,
  DWGM_STATUS_PANIC = 9,
} DwgmStatus;

typedef enum {
  DWGM_MARGINAL_DW = 0,
  DWGM_MARGINAL_ZIDW = 1,
  DWGM_MARGINAL_AUTO_BIC = 2,
  DWGM_MARGINAL_EMPIRICAL = 3,
} DwgmMarginal;

/**
 * Counts plus optional covariates.
 */
typedef struct DwgmDataset DwgmDataset;

/**
 * Merged structure-learning output.
 */
typedef struct DwgmResult DwgmResult;

/**
 * Settings for `dwgm_learn_structure`; fill with `dwgm_options_default` first.
 */
typedef struct {
  uint64_t seed;
  size_t chains;
  size_t iterations;
  double burn_in_fraction;
  double refresh_rate;
  double link_prob;
  double b;
  double d_scale;
  size_t mh_iterations;
  DwgmMarginal marginal;
  /**
   * Nonzero: covariates enter the marginal regressions.
   */
  uint8_t use_covariates;
} DwgmOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread; empty after a success.
 * The pointer stays valid until the next dwgm call on this thread.
 */
const char *dwgm_last_error_message(void);

/**
 * `P(Y <= y)`; `y = -1` gives 0.
 */
DwgmStatus dwgm_dw_cdf(int64_t y, double q, double beta, double *out);

DwgmStatus dwgm_dw_pmf(int64_t y, double q, double beta, double *out);

/**
 * Smallest `y` with `cdf(y) >= tau`.
 */
DwgmStatus dwgm_dw_quantile(double tau, double q, double beta, uint64_t *out);

DwgmStatus dwgm_zidw_pmf(int64_t y, double q, double beta, double pi, double *out);

/**
 * Build a dataset from `n x p` row-major counts and `n x d` row-major
 * covariates (`covariates` may be null when `d == 0`). Returns null on
 * failure.
 */
DwgmDataset *dwgm_dataset_new(const uint64_t *counts,
                              size_t n,
                              size_t p,
                              const double *covariates,
                              size_t d);

void dwgm_dataset_free(DwgmDataset *ds);

DwgmStatus dwgm_options_default(DwgmOptions *out);

/**
 * Fit marginals, run the chains and store the merged result in `*out`.
 */
DwgmStatus dwgm_learn_structure(const DwgmDataset *ds,
                                const DwgmOptions *options,
                                DwgmResult **out);

/**
 * Number of nodes; 0 for a null handle.
 */
size_t dwgm_result_nodes(const DwgmResult *r);

/**
 * Copy the `p x p` edge-probability matrix, row-major, into `out`.
 */
DwgmStatus dwgm_result_edge_probabilities(const DwgmResult *r, double *out, size_t len);

/**
 * Copy the posterior-mean partial-correlation matrix, row-major, into `out`.
 */
DwgmStatus dwgm_result_partial_correlations(const DwgmResult *r, double *out, size_t len);

void dwgm_result_free(DwgmResult *r);

/**
 * Area under the ROC curve of `probs` (row-major `p x p`) against the upper
 * triangle of `truth` (row-major 0/1 adjacency).
 */
DwgmStatus dwgm_auc(const double *probs, const uint8_t *truth, size_t p, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DWGM_H */
