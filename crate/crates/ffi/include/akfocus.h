#ifndef AKFOCUS_H
#define AKFOCUS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AkStatus {
  AK_STATUS_OK = 0,
  AK_STATUS_NULL_POINTER = 1,
  AK_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Mass reached a grid edge; widen or refine the grid.
   */
  AK_STATUS_TRUNCATION = 3,
  /**
   * An internal numerical cross-check failed.
   */
  AK_STATUS_NUMERICAL = 4,
  AK_STATUS_PANIC = 5,
} AkStatus;

/**
 * Grid oracle behind an opaque pointer.
 */
typedef struct AkOracle AkOracle;

/**
 * Probe state behind an opaque pointer.
 */
typedef struct AkProbe AkProbe;

/**
 * First and second moments of a two-mode probe.
 */
typedef struct AkMoments {
  double m_q1;
  double m_q2;
  double m_p1;
  double m_p2;
  double v_q1;
  double v_q2;
  double v_p1;
  double v_p2;
  double c_q;
  double c_p;
} AkMoments;

typedef struct AkCoupling {
  double lambda;
  double mu;
  double kappa;
} AkCoupling;

typedef struct AkNoiseMoments {
  double e1;
  double e2;
  double var_e;
  double f1;
  double f2;
  double var_f;
  double var_e_single;
  double var_f_single;
  double var_product;
  double m2_product;
  bool uncertainty_violation;
} AkNoiseMoments;

typedef struct AkFocusing {
  double fq;
  double fp;
  bool jointly_focused;
} AkFocusing;

typedef struct AkMarginalReport {
  double position;
  double momentum;
  double position_unreflected;
  double momentum_unreflected;
} AkMarginalReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Byte length of the last error message on this thread, without the terminator.
 */
size_t ak_last_error_length(void);

/**
 * Copies the last error message into `buf` as a NUL-terminated string,
 * truncating to `len - 1` bytes. Returns the number of bytes written
 * excluding the terminator.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t ak_last_error_message(char *buf, size_t len);

/**
 * Two-mode Gaussian probe with position covariance `[[a, b], [b, d]]`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum AkStatus ak_probe_gaussian_new(double a, double b, double d, struct AkProbe **out);

/**
 * Mixture of product Gaussians centered at `(x[i], k[i])` with weights
 * `weights[i]`, position variance `s` and momentum variance `r`.
 *
 * # Safety
 * `weights`, `x` and `k` must each be valid for `n` reads; `out` for writes.
 */
enum AkStatus ak_probe_mixture_new(const double *weights,
                                   const double *x,
                                   const double *k,
                                   size_t n,
                                   double s,
                                   double r,
                                   struct AkProbe **out);

/**
 * # Safety
 * `probe` must be null or come from an `ak_probe_*_new` call not yet freed.
 */
void ak_probe_free(struct AkProbe *probe);

/**
 * # Safety
 * `probe` must be a live handle; `out` valid for writes.
 */
enum AkStatus ak_probe_moments(const struct AkProbe *probe, struct AkMoments *out);

/**
 * Noise-distribution moments and the two uncertainty products.
 *
 * # Safety
 * `probe` must be a live handle; `coupling` valid for reads; `out` for writes.
 */
enum AkStatus ak_noise_moments(const struct AkProbe *probe,
                               const struct AkCoupling *coupling_params,
                               struct AkNoiseMoments *out);

/**
 * # Safety
 * `probe` must be a live handle; `coupling` valid for reads; `out` for writes.
 */
enum AkStatus ak_focusing(const struct AkProbe *probe,
                          const struct AkCoupling *coupling_params,
                          struct AkFocusing *out);

/**
 * Closed-form joint-focusing predicate of the probe's family.
 *
 * # Safety
 * `probe` must be a live handle; `coupling` valid for reads; `out` for writes.
 */
enum AkStatus ak_focusing_predicate(const struct AkProbe *probe,
                                    const struct AkCoupling *coupling_params,
                                    bool *out);

/**
 * Grid oracle for a Gaussian system packet, `n` points per axis.
 * `n = 0` selects the default size.
 *
 * # Safety
 * `probe` must be a live handle; `coupling` valid for reads; `out` for writes.
 */
enum AkStatus ak_oracle_new(const struct AkProbe *probe,
                            const struct AkCoupling *coupling_params,
                            double system_mean,
                            double system_variance,
                            double system_momentum,
                            size_t n,
                            struct AkOracle **out);

/**
 * # Safety
 * `oracle` must be null or come from `ak_oracle_new` and not yet freed.
 */
void ak_oracle_free(struct AkOracle *oracle);

/**
 * Total mass of the simulated joint outcome distribution.
 *
 * # Safety
 * `oracle` must be a live handle; `out` valid for writes.
 */
enum AkStatus ak_oracle_joint_mass(const struct AkOracle *oracle, double *out);

/**
 * Simulated outcome marginals against the convolution forms.
 *
 * # Safety
 * `oracle` must be a live handle; `out` valid for writes.
 */
enum AkStatus ak_oracle_marginal_check(const struct AkOracle *oracle, struct AkMarginalReport *out);

/**
 * Largest deviation from covariance under a phase-space shift `(q0, p0)`,
 * with the outcome grids translated alongside the state.
 *
 * # Safety
 * `oracle` must be a live handle; `out` valid for writes.
 */
enum AkStatus ak_oracle_covariance_test(const struct AkOracle *oracle,
                                        double q0,
                                        double p0,
                                        double *out);

/**
 * Same as [`ak_oracle_covariance_test`] but on fixed system quadrature nodes;
 * the result shrinks as the grid is refined.
 *
 * # Safety
 * `oracle` must be a live handle; `out` valid for writes.
 */
enum AkStatus ak_oracle_covariance_test_fixed_quadrature(const struct AkOracle *oracle,
                                                         double q0,
                                                         double p0,
                                                         double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AKFOCUS_H */
