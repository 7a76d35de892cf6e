/* Copyright (c) nepv contributors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C API for the nepv library: SCF solvers and convergence-rate analysis for
 * nonlinear eigenvector problems H(V)V = V*Lambda with right-unitarily
 * invariant Hermitian H.
 *
 * All handles are opaque and freed with the matching *_free function.  Every
 * fallible call returns a nepv_error code; nepv_last_error() carries detail
 * for the most recent failure on the calling thread.  Complex matrices cross
 * the boundary as column-major arrays of nepv_complex.
 */

#ifndef NEPV_H
#define NEPV_H

#if defined(_WIN32)
#define NEPV_API __declspec(dllexport)
#else
#define NEPV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct nepv_problem nepv_problem;
typedef struct nepv_certificate nepv_certificate;
typedef struct nepv_history nepv_history;

typedef enum nepv_error {
  NEPV_OK = 0,
  NEPV_ERR_INVALID_PARAMS,
  NEPV_ERR_NOT_HERMITIAN,
  NEPV_ERR_BACKEND_FAILURE,
  NEPV_ERR_RANK_DEFICIENT,
  NEPV_ERR_DIMENSION_MISMATCH,
  NEPV_ERR_SINGULAR_OVERLAP,
  NEPV_ERR_ANGLE_AT_PI_OVER_TWO,
  NEPV_ERR_SHIFT_OUT_OF_RANGE,
  NEPV_ERR_GAP_COLLAPSE,
  NEPV_ERR_NOT_A_SOLUTION,
  NEPV_ERR_GAP_VIOLATION,
  NEPV_ERR_INSUFFICIENT_HISTORY,
  NEPV_ERR_TOO_LARGE,
  NEPV_ERR_NOT_SELF_ADJOINT,
  NEPV_ERR_INVALID_SPECTRUM,
  NEPV_ERR_NO_ROOT_IN_RANGE,
  NEPV_ERR_CERTIFICATION_FAILED,
  NEPV_ERR_INTERNAL
} nepv_error;

typedef enum nepv_scf_status {
  NEPV_SCF_CONVERGED = 0,
  NEPV_SCF_MAX_ITER = 1,
  NEPV_SCF_DIVERGED = 2,
  NEPV_SCF_GAP_COLLAPSE = 3
} nepv_scf_status;

typedef struct nepv_complex {
  double re;
  double im;
} nepv_complex;

typedef struct nepv_scf_options {
  int max_iter;           /* >= 1, default 5000 */
  double tol_residual;    /* > 0, default 1e-12 */
  double sigma;           /* level shift, 0 for plain SCF */
  double divergence_cap;  /* abort above this residual, default 1e3 */
  int record_subspace_errors;          /* needs `reference` when nonzero */
  const nepv_certificate* reference;
} nepv_scf_options;

typedef struct nepv_rate_report {
  double sigma;
  double eta_sup_infty;  /* spectral radius of the local operator */
  double eta_sup;        /* Frobenius operator norm */
  double eta_czbl;       /* gap-scaled derivative-block norm */
  double observed;       /* fitted rate; valid iff has_observed */
  int has_observed;
  double delta_star;
  double s_star;
  double mu_min;
  double mu_max;
  double sigma_used_for_truth;
  int plain_converged;
  double rho_sigma_bound; /* NaN when unavailable */
  double normality_defect;
} nepv_rate_report;

NEPV_API const char* nepv_version(void);
NEPV_API const char* nepv_error_name(nepv_error code);
NEPV_API const char* nepv_scf_status_name(nepv_scf_status status);
/* Detail message of the last failure on this thread; empty string if none. */
NEPV_API const char* nepv_last_error(void);

/* --- problems ----------------------------------------------------------- */

NEPV_API nepv_error nepv_problem_kohn_sham(int n, int k, double alpha, nepv_problem** out);
NEPV_API nepv_error nepv_problem_gpe(int grid_points, double half_width, double omega,
                                     double beta,
                                     double (*potential)(double x, double y, void* ctx),
                                     void* ctx, nepv_problem** out);
NEPV_API void nepv_problem_free(nepv_problem* problem);
NEPV_API void nepv_problem_dims(const nepv_problem* problem, int* n, int* k);
NEPV_API const char* nepv_problem_label(const nepv_problem* problem);
NEPV_API double nepv_problem_apriori_sigma(const nepv_problem* problem);
/* h = H(v); v is n x k, h is n x n, both column-major. */
NEPV_API nepv_error nepv_problem_evaluate(const nepv_problem* problem, const nepv_complex* v,
                                          nepv_complex* h);

/* --- SCF ----------------------------------------------------------------- */

NEPV_API void nepv_scf_options_init(nepv_scf_options* opts);
/* Deterministic default start (n x k); seeded for problems with random
 * starts. */
NEPV_API nepv_error nepv_default_start(const nepv_problem* problem, unsigned long long seed,
                                       nepv_complex* v0);
/* v0 may be NULL to use the default start for `seed`. */
NEPV_API nepv_error nepv_scf_run(const nepv_problem* problem, const nepv_complex* v0,
                                 unsigned long long seed, const nepv_scf_options* opts,
                                 nepv_history** out);
NEPV_API void nepv_history_free(nepv_history* history);
NEPV_API int nepv_history_length(const nepv_history* history);
NEPV_API int nepv_history_iterations(const nepv_history* history);
NEPV_API nepv_scf_status nepv_history_status(const nepv_history* history);
NEPV_API double nepv_history_residual(const nepv_history* history, int i);
NEPV_API double nepv_history_gap(const nepv_history* history, int i);
/* Returns 1 and stores the error when recorded, 0 otherwise. */
NEPV_API int nepv_history_subspace_error(const nepv_history* history, int i, double* error);
NEPV_API nepv_error nepv_history_final_v(const nepv_history* history, nepv_complex* v);
NEPV_API nepv_error nepv_observed_rate(const nepv_history* history, int window, double* rate);

/* --- certificates -------------------------------------------------------- */

NEPV_API nepv_error nepv_certify(const nepv_problem* problem, const nepv_complex* v,
                                 double cert_tol, nepv_certificate** out);
/* Plain SCF to `tol`; level-shifted fallback at the a-priori shift when the
 * plain iteration stalls above the certification tolerance. */
NEPV_API nepv_error nepv_ground_truth(const nepv_problem* problem, double tol, int max_iter,
                                      unsigned long long seed, nepv_certificate** out,
                                      double* sigma_used, int* plain_converged);
NEPV_API void nepv_certificate_free(nepv_certificate* cert);
NEPV_API double nepv_certificate_delta(const nepv_certificate* cert);
NEPV_API double nepv_certificate_span(const nepv_certificate* cert);
NEPV_API double nepv_certificate_residual(const nepv_certificate* cert);
/* lam must hold n doubles. */
NEPV_API nepv_error nepv_certificate_eigenvalues(const nepv_certificate* cert, double* lam);
/* v must hold n*k entries. */
NEPV_API nepv_error nepv_certificate_vstar(const nepv_certificate* cert, nepv_complex* v);

/* --- convergence analysis ------------------------------------------------ */

NEPV_API nepv_error nepv_spectral_radius(const nepv_problem* problem,
                                         const nepv_certificate* cert, double sigma,
                                         double* rho);
NEPV_API nepv_error nepv_operator_norm(const nepv_problem* problem,
                                       const nepv_certificate* cert, double sigma,
                                       double* eta);
NEPV_API nepv_error nepv_eta_czbl(const nepv_problem* problem, const nepv_certificate* cert,
                                  double* eta);
NEPV_API nepv_error nepv_eta_m(const nepv_problem* problem, const nepv_certificate* cert,
                               int m, double sigma, double* eta);
NEPV_API nepv_error nepv_q_extremes(const nepv_problem* problem, const nepv_certificate* cert,
                                    double* mu_min, double* mu_max);
NEPV_API nepv_error nepv_rho_sigma_bound(double mu_min, double mu_max, double delta_star,
                                         double s_star, double sigma, double* bound);
NEPV_API nepv_error nepv_sigma_lower_bound(double mu_max, double delta_star, double* sigma);
NEPV_API nepv_error nepv_apriori_sigma_ks(double alpha, int n, double* sigma);
NEPV_API nepv_error nepv_optimal_sigma(double mu_min, double mu_max, double delta_star,
                                       double s_star, double* sigma);

/* Ground truth + full rate bundle at the evaluation shift `sigma`. */
NEPV_API nepv_error nepv_compute_rates(const nepv_problem* problem, double sigma, double tol,
                                       int max_iter, int window, unsigned long long seed,
                                       nepv_rate_report* out);
/* Rate bundle against an existing certificate (sigma sweeps reuse the truth).
 * When with_observed is zero the measurement run is skipped. */
NEPV_API nepv_error nepv_rates_with_certificate(const nepv_problem* problem,
                                                const nepv_certificate* cert, double sigma,
                                                double tol, int max_iter, int window,
                                                unsigned long long seed, int with_observed,
                                                nepv_rate_report* out);

#ifdef __cplusplus
}
#endif

#endif /* NEPV_H */
