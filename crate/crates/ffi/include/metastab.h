#ifndef METASTAB_H
#define METASTAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MetastabStatus {
  METASTAB_STATUS_OK = 0,
  METASTAB_STATUS_NULL_POINTER = 1,
  METASTAB_STATUS_DOMAIN = 2,
  METASTAB_STATUS_QUANTUM_REGIME_EXCEEDED = 3,
  METASTAB_STATUS_DIVERGENT = 4,
  METASTAB_STATUS_INVALID_ARGUMENT = 5,
  METASTAB_STATUS_INSUFFICIENT_POINTS = 6,
  METASTAB_STATUS_INTEGRATOR = 7,
  METASTAB_STATUS_PANIC = 8,
} MetastabStatus;

typedef enum MetastabDeterminantForm {
  METASTAB_DETERMINANT_FORM_REDUCED = 0,
  METASTAB_DETERMINANT_FORM_EXACT = 1,
} MetastabDeterminantForm;

/**
 * Opaque rate curve.
 */
typedef struct MetastabCurve MetastabCurve;

/**
 * Opaque potential parameters.
 */
typedef struct MetastabParams MetastabParams;

/**
 * Opaque list of oracle reports.
 */
typedef struct MetastabReports MetastabReports;

typedef struct MetastabParamsInfo {
  double mass_me;
  double hbar_omega;
  double a;
  /**
   * meV/Å³.
   */
  double gamma;
  /**
   * V(a) in meV.
   */
  double barrier_height;
  /**
   * (6/5)Mωa²/ħ.
   */
  double action_scale;
  /**
   * K.
   */
  double t_crit;
} MetastabParamsInfo;

typedef struct MetastabBounceInfo {
  double kappa;
  /**
   * meV.
   */
  double energy;
  double chi[3];
  double p_sq;
  /**
   * ħ/meV; infinite at κ = 0.
   */
  double period;
  /**
   * K.
   */
  double t_star;
  double action_over_hbar;
  /**
   * M·N⁻²/ħ.
   */
  double norm_sq;
} MetastabBounceInfo;

typedef struct MetastabSpectrum {
  /**
   * meV².
   */
  double eps_minus1;
  double eps_0;
  double eps_1;
} MetastabSpectrum;

typedef struct MetastabRatePoint {
  double t_star;
  double kappa;
  double hbar_omega;
  double action_over_hbar;
  double norm_sq;
  double det_ratio;
  /**
   * ħΓ in meV.
   */
  double gamma;
  double ln_gamma;
  double arrhenius;
  bool underflow;
} MetastabRatePoint;

/**
 * Absent features are NaN with the matching `has_*` flag cleared.
 */
typedef struct MetastabCurveFeatures {
  bool has_peak;
  double t_peak;
  double gamma_peak;
  bool has_arrhenius;
  double t_arrhenius;
  bool has_exponent;
  double fitted_exponent;
  size_t warning_count;
} MetastabCurveFeatures;

typedef struct MetastabOracleRow {
  /**
   * NaN when the row is not tied to a κ.
   */
  double kappa;
  double analytic;
  double numeric;
  double discrepancy;
  double threshold;
  bool converged;
  bool pass;
  bool gating;
} MetastabOracleRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t metastab_last_error_message(char *buf, size_t len);

/**
 * # Safety
 * `out` must be a valid pointer; the handle is freed with [`metastab_params_free`].
 */
enum MetastabStatus metastab_params_new(double mass_me,
                                        double hbar_omega_mev,
                                        double a_angstrom,
                                        struct MetastabParams **out);

/**
 * # Safety
 * `p` must be null or a handle from [`metastab_params_new`], freed once.
 */
void metastab_params_free(struct MetastabParams *p);

/**
 * # Safety
 * Pointers must be valid.
 */
enum MetastabStatus metastab_params_info(const struct MetastabParams *p,
                                         struct MetastabParamsInfo *out);

/**
 * Bounce at κ ∈ [−4/27, 0].
 *
 * # Safety
 * Pointers must be valid.
 */
enum MetastabStatus metastab_bounce_state(const struct MetastabParams *p,
                                          double kappa,
                                          struct MetastabBounceInfo *out);

/**
 * Bounce whose period is ħ/(k_B T*).
 *
 * # Safety
 * Pointers must be valid.
 */
enum MetastabStatus metastab_invert_temperature(const struct MetastabParams *p,
                                                double t_star,
                                                struct MetastabBounceInfo *out);

/**
 * x_cl(τ) in Å with the exit point at τ = 0.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MetastabStatus metastab_bounce_position(const struct MetastabParams *p,
                                             double kappa,
                                             double tau,
                                             double *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum MetastabStatus metastab_lame_spectrum(const struct MetastabParams *p,
                                           double kappa,
                                           struct MetastabSpectrum *out);

/**
 * ω²·Det^R[Ô]/Det[ĥ].
 *
 * # Safety
 * Pointers must be valid.
 */
enum MetastabStatus metastab_det_ratio(const struct MetastabParams *p,
                                       double kappa,
                                       enum MetastabDeterminantForm form,
                                       double *out);

/**
 * ħΓ(T*) with the Arrhenius prefactor ħω/2π.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MetastabStatus metastab_decay_rate(const struct MetastabParams *p,
                                        double t_star,
                                        enum MetastabDeterminantForm form,
                                        struct MetastabRatePoint *out);

/**
 * Scans `temps` (or the default grid when `temps` is null or `n` is 0).
 *
 * # Safety
 * `temps` must be null or point to `n` doubles; `out` must be valid. The
 * curve is freed with [`metastab_curve_free`].
 */
enum MetastabStatus metastab_scan(const struct MetastabParams *p,
                                  const double *temps,
                                  size_t n,
                                  enum MetastabDeterminantForm form,
                                  struct MetastabCurve **out);

/**
 * # Safety
 * `c` must be null or a handle from [`metastab_scan`], freed once.
 */
void metastab_curve_free(struct MetastabCurve *c);

/**
 * Number of points; 0 for a null handle.
 *
 * # Safety
 * `c` must be null or valid.
 */
size_t metastab_curve_len(const struct MetastabCurve *c);

/**
 * # Safety
 * Pointers must be valid.
 */
enum MetastabStatus metastab_curve_point(const struct MetastabCurve *c,
                                         size_t i,
                                         struct MetastabRatePoint *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum MetastabStatus metastab_curve_features(const struct MetastabCurve *c,
                                            struct MetastabCurveFeatures *out);

/**
 * Curve as JSON; same contract as [`metastab_last_error_message`].
 *
 * # Safety
 * `c` must be valid; `buf` null or `len` writable bytes.
 */
size_t metastab_curve_json(const struct MetastabCurve *c, char *buf, size_t len);

/**
 * Runs the oracle suite on the standard κ set.
 *
 * # Safety
 * Pointers must be valid. The reports are freed with [`metastab_reports_free`].
 */
enum MetastabStatus metastab_verify(const struct MetastabParams *p,
                                    double rtol,
                                    enum MetastabDeterminantForm form,
                                    struct MetastabReports **out);

/**
 * # Safety
 * `r` must be null or a handle from [`metastab_verify`], freed once.
 */
void metastab_reports_free(struct MetastabReports *r);

/**
 * # Safety
 * `r` must be null or valid.
 */
size_t metastab_reports_len(const struct MetastabReports *r);

/**
 * True when every gating row passes; false for a null handle.
 *
 * # Safety
 * `r` must be null or valid.
 */
bool metastab_reports_all_pass(const struct MetastabReports *r);

/**
 * # Safety
 * Pointers must be valid.
 */
enum MetastabStatus metastab_reports_row(const struct MetastabReports *r,
                                         size_t i,
                                         struct MetastabOracleRow *out);

/**
 * Name of row `i`; returns 0 if out of range.
 *
 * # Safety
 * `r` must be valid; `buf` null or `len` writable bytes.
 */
size_t metastab_reports_quantity(const struct MetastabReports *r, size_t i, char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* METASTAB_H */
