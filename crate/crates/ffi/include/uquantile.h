#ifndef UQUANTILE_H
#define UQUANTILE_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UqStatus {
  UQ_STATUS_OK = 0,
  UQ_STATUS_NULL_POINTER = 1,
  UQ_STATUS_INVALID_ARGUMENT = 2,
  UQ_STATUS_DIMENSION_MISMATCH = 3,
  UQ_STATUS_TOO_FEW_POINTS = 4,
  UQ_STATUS_CAP_EXCEEDED = 5,
  UQ_STATUS_NO_FAST_PATH = 6,
  UQ_STATUS_UNKNOWN_KERNEL = 7,
  // `zeta > 0` or a positive density at the quantile failed.
  UQ_STATUS_HYPOTHESIS = 8,
  UQ_STATUS_DEGENERATE = 9,
  UQ_STATUS_NO_ORACLE = 10,
  UQ_STATUS_PARSE = 11,
  UQ_STATUS_IO = 12,
  UQ_STATUS_PANIC = 13,
} UqStatus;

typedef enum UqBackend {
  UQ_BACKEND_EXACT = 0,
  UQ_BACKEND_FAST = 1,
  UQ_BACKEND_AUTO = 2,
} UqBackend;

// Opaque kernel handle.
typedef struct UqKernel UqKernel;

// Kernel callback: `points` holds `m` pointers to `dim` coordinates each.
// It may be called concurrently from several threads.
typedef double (*UqKernelFn)(const double *const *points, size_t m, size_t dim, void *user_data);

typedef struct UqEstimate {
  double value;
  uint64_t total_count;
  uint64_t selected_rank;
  uint64_t tie_count;
} UqEstimate;

typedef struct UqSummary {
  double point;
  double zeta_hat;
  double density_hat;
  double std_error;
  double ci_lower;
  double ci_upper;
  double confidence_level;
  double bandwidth;
  uint64_t total_count;
  uint64_t selected_rank;
  uint64_t tie_count;
  bool zeta_subsampled;
  bool density_subsampled;
} UqSummary;

typedef struct UqHlOracle {
  double center;
  double zeta;
  double square_integral;
  double density_at_center;
  double sigma2;
} UqHlOracle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next failing call on the same thread.
const char *uq_last_error_message(void);

// Creates a built-in kernel: `walsh`, `mean:<m>` or
// `dist:<euclidean|manhattan|chebyshev>`.
enum UqStatus uq_kernel_from_name(const char *name, struct UqKernel **kernel_out);

// Wraps a C callback as a symmetric kernel of the given degree. `dim = 0`
// accepts points of any dimension. `name` may be null.
enum UqStatus uq_kernel_from_callback(size_t degree,
                                      size_t dim,
                                      UqKernelFn callback,
                                      void *user_data,
                                      const char *name,
                                      struct UqKernel **kernel_out);

// Releases a kernel handle. Null is ignored.
void uq_kernel_free(struct UqKernel *kernel);

size_t uq_kernel_degree(const struct UqKernel *kernel);

// The p-quantile of all kernel values over m-subsets of the sample.
enum UqStatus uq_u_quantile(const struct UqKernel *kernel,
                            const double *data,
                            size_t n,
                            size_t dim,
                            double p,
                            enum UqBackend backend,
                            struct UqEstimate *result);

// Number of kernel values `<= threshold`.
enum UqStatus uq_count_leq(const struct UqKernel *kernel,
                           const double *data,
                           size_t n,
                           size_t dim,
                           double threshold,
                           uint64_t *count);

// Plug-in estimate of the variance of the conditional indicator at the
// p-quantile. May be nonpositive.
enum UqStatus uq_zeta_plugin(const struct UqKernel *kernel,
                             const double *data,
                             size_t n,
                             size_t dim,
                             double p,
                             uint64_t seed,
                             double *zeta);

// Point estimate with plug-in standard error and confidence interval.
// Returns [`UqStatus::Hypothesis`] when the plug-in constants are not
// positive.
enum UqStatus uq_asymptotic_summary(const struct UqKernel *kernel,
                                    const double *data,
                                    size_t n,
                                    size_t dim,
                                    double p,
                                    double level,
                                    uint64_t seed,
                                    struct UqSummary *summary);

// Asymptotic relative efficiency `f(mu)^2 zeta1 / zeta` of the
// U-quantile-statistic against the U-statistic of the same kernel.
enum UqStatus uq_efficiency(double zeta1, double zeta, double density_at_mu, double *ratio);

// Closed-form constants for the median of pairwise averages under a named
// symmetric distribution such as `normal(0,1)` or `uniform(0,1)`.
enum UqStatus uq_oracle_hl(const char *distribution, struct UqHlOracle *oracle);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UQUANTILE_H */
