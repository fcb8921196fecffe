#ifndef ADAPTIVE_SPRT_H
#define ADAPTIVE_SPRT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AsprtStatus {
  ASPRT_STATUS_OK = 0,
  ASPRT_STATUS_NULL_POINTER = 1,
  ASPRT_STATUS_DOMAIN = 2,
  ASPRT_STATUS_UNSUPPORTED = 3,
  ASPRT_STATUS_NUMERIC = 4,
  ASPRT_STATUS_NON_TERMINATION = 5,
  ASPRT_STATUS_CONFIG = 6,
  ASPRT_STATUS_IO = 7,
  ASPRT_STATUS_PANIC = 8,
} AsprtStatus;

typedef enum AsprtProcedure {
  ASPRT_PROCEDURE_ADAPTIVE = 0,
  ASPRT_PROCEDURE_CLASSICAL = 1,
} AsprtProcedure;

typedef enum AsprtTruth {
  ASPRT_TRUTH_H0 = 0,
  ASPRT_TRUTH_H1 = 1,
  ASPRT_TRUTH_RANDOM = 2,
} AsprtTruth;

/*
 Opaque hypothesis pair.
 */
typedef struct AsprtPair AsprtPair;

typedef struct AsprtMoments {
  double eta_x;
  double sigma2_x;
  double eta_y;
  double sigma2_y;
} AsprtMoments;

typedef struct AsprtThresholds {
  double a;
  double b;
} AsprtThresholds;

typedef struct AsprtExperimentOptions {
  double alpha;
  double beta;
  uint64_t replications;
  uint64_t seed;
  enum AsprtProcedure procedure;
  enum AsprtTruth truth;
  /*
   Step cap per trial; 0 selects the library default.
   */
  uint64_t cap;
  /*
   Worker threads; 0 selects the environment or the machine default.
   */
  size_t threads;
} AsprtExperimentOptions;

typedef struct AsprtSummary {
  double pcs;
  double se_pcs;
  double accuracy;
  double mean_n_inferior;
  double se_n_inferior;
  /*
   Mean total draws (adaptive) or mean rounds (classical).
   */
  double asn;
  double se_asn;
  double mean_total_draws;
  double n1_star_closed;
  double n1_star_series;
  double asn_wald_k0;
  uint64_t replications;
} AsprtSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Normal pair with a common variance.

 # Safety
 `out` must be valid for a pointer write.
 */
enum AsprtStatus asprt_pair_new_normal(double mean0,
                                       double mean1,
                                       double variance,
                                       struct AsprtPair **out);

/*
 # Safety
 `out` must be valid for a pointer write.
 */
enum AsprtStatus asprt_pair_new_poisson(double rate0, double rate1, struct AsprtPair **out);

/*
 Asymmetric Laplace pair given as (location, scale, asymmetry) for each density.

 # Safety
 `out` must be valid for a pointer write.
 */
enum AsprtStatus asprt_pair_new_laplace(double m0,
                                        double l0,
                                        double k0,
                                        double m1,
                                        double l1,
                                        double k1,
                                        struct AsprtPair **out);

/*
 Releases a handle. Null is ignored.

 # Safety
 `pair` must be null or a handle from `asprt_pair_new_*` not yet freed.
 */
void asprt_pair_free(struct AsprtPair *pair);

/*
 # Safety
 `pair` must be a live handle and `out` valid for writes.
 */
enum AsprtStatus asprt_llr_moments(const struct AsprtPair *pair, struct AsprtMoments *out);

/*
 Expected inferior allocations: closed form and truncated series.
 Either output may be null.

 # Safety
 `pair` must be a live handle; non-null outputs must be valid for writes.
 */
enum AsprtStatus asprt_n1_star(const struct AsprtPair *pair,
                               double eps,
                               double *closed_form,
                               double *series);

/*
 # Safety
 `out` must be valid for writes.
 */
enum AsprtStatus asprt_thresholds(double alpha, double beta, struct AsprtThresholds *out);

/*
 Wald approximations to the expected statistic length under K0 and K1.

 # Safety
 `pair` must be a live handle; `asn_k0` and `asn_k1` valid for writes.
 */
enum AsprtStatus asprt_asn_wald(const struct AsprtPair *pair,
                                double alpha,
                                double beta,
                                double *asn_k0,
                                double *asn_k1);

/*
 Options with the library defaults for the given error rates.
 */
struct AsprtExperimentOptions asprt_experiment_options_default(double alpha, double beta);

/*
 Runs a Monte Carlo experiment. Results depend only on the options, not on
 the thread count.

 # Safety
 `pair` must be a live handle, `options` readable and `out` valid for writes.
 */
enum AsprtStatus asprt_run_experiment(const struct AsprtPair *pair,
                                      const struct AsprtExperimentOptions *options,
                                      struct AsprtSummary *out);

/*
 Message for the most recent failure on this thread, or null. The pointer
 stays valid until the next call into this library on the same thread.
 */
const char *asprt_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *asprt_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADAPTIVE_SPRT_H */
