// Copyright (c) nepv contributors
// SPDX-License-Identifier: Apache-2.0

#include "nepv/nepv.h"

#include <cstring>
#include <limits>
#include <string>

#include "nepv/analysis.hpp"

struct nepv_problem {
  nepv::NepvProblem impl;
};

struct nepv_certificate {
  nepv::SolutionCertificate impl;
};

struct nepv_history {
  nepv::IterationHistory impl;
};

namespace {

thread_local std::string g_last_error;

nepv_error map_code(nepv::ErrorCode code) {
  using nepv::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidParams: return NEPV_ERR_INVALID_PARAMS;
    case ErrorCode::NotHermitian: return NEPV_ERR_NOT_HERMITIAN;
    case ErrorCode::BackendFailure: return NEPV_ERR_BACKEND_FAILURE;
    case ErrorCode::RankDeficient: return NEPV_ERR_RANK_DEFICIENT;
    case ErrorCode::DimensionMismatch: return NEPV_ERR_DIMENSION_MISMATCH;
    case ErrorCode::SingularOverlap: return NEPV_ERR_SINGULAR_OVERLAP;
    case ErrorCode::AngleAtPiOverTwo: return NEPV_ERR_ANGLE_AT_PI_OVER_TWO;
    case ErrorCode::ShiftOutOfRange: return NEPV_ERR_SHIFT_OUT_OF_RANGE;
    case ErrorCode::GapCollapse: return NEPV_ERR_GAP_COLLAPSE;
    case ErrorCode::NotASolution: return NEPV_ERR_NOT_A_SOLUTION;
    case ErrorCode::GapViolation: return NEPV_ERR_GAP_VIOLATION;
    case ErrorCode::InsufficientHistory: return NEPV_ERR_INSUFFICIENT_HISTORY;
    case ErrorCode::TooLarge: return NEPV_ERR_TOO_LARGE;
    case ErrorCode::NotSelfAdjoint: return NEPV_ERR_NOT_SELF_ADJOINT;
    case ErrorCode::InvalidSpectrum: return NEPV_ERR_INVALID_SPECTRUM;
    case ErrorCode::NoRootInRange: return NEPV_ERR_NO_ROOT_IN_RANGE;
    case ErrorCode::CertificationFailed: return NEPV_ERR_CERTIFICATION_FAILED;
  }
  return NEPV_ERR_INTERNAL;
}

template <typename Fn>
nepv_error guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return NEPV_OK;
  } catch (const nepv::Error& err) {
    g_last_error = err.what();
    return map_code(err.code());
  } catch (const std::exception& err) {
    g_last_error = err.what();
    return NEPV_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return NEPV_ERR_INTERNAL;
  }
}


template <typename T>
const T& deref(const T* handle) {
  if (!handle) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null handle");
  return *handle;
}

nepv::Matrix to_matrix(const nepv_complex* data, Eigen::Index rows, Eigen::Index cols) {
  nepv::Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const nepv_complex& z = data[j * rows + i];
      m(i, j) = nepv::Complex(z.re, z.im);
    }
  return m;
}

void from_matrix(const nepv::Matrix& m, nepv_complex* data) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      data[j * m.rows() + i] = nepv_complex{m(i, j).real(), m(i, j).imag()};
    }
}

void fill_report(const nepv::RateReport& src, nepv_rate_report* dst) {
  dst->sigma = src.sigma;
  dst->eta_sup_infty = src.eta_sup_infty;
  dst->eta_sup = src.eta_sup;
  dst->eta_czbl = src.eta_czbl;
  dst->has_observed = src.observed.has_value() ? 1 : 0;
  dst->observed = src.observed.value_or(std::numeric_limits<double>::quiet_NaN());
  dst->delta_star = src.delta_star;
  dst->s_star = src.s_star;
  dst->mu_min = src.mu_min;
  dst->mu_max = src.mu_max;
  dst->sigma_used_for_truth = src.sigma_used_for_truth;
  dst->plain_converged = src.plain_converged ? 1 : 0;
  dst->rho_sigma_bound = src.rho_bound;
  dst->normality_defect = src.normality_defect;
}

}  // namespace

extern "C" {

const char* nepv_version(void) { return "0.1.0"; }

const char* nepv_error_name(nepv_error code) {
  switch (code) {
    case NEPV_OK: return "OK";
    case NEPV_ERR_INVALID_PARAMS: return "InvalidParams";
    case NEPV_ERR_NOT_HERMITIAN: return "NotHermitian";
    case NEPV_ERR_BACKEND_FAILURE: return "BackendFailure";
    case NEPV_ERR_RANK_DEFICIENT: return "RankDeficient";
    case NEPV_ERR_DIMENSION_MISMATCH: return "DimensionMismatch";
    case NEPV_ERR_SINGULAR_OVERLAP: return "SingularOverlap";
    case NEPV_ERR_ANGLE_AT_PI_OVER_TWO: return "AngleAtPiOverTwo";
    case NEPV_ERR_SHIFT_OUT_OF_RANGE: return "ShiftOutOfRange";
    case NEPV_ERR_GAP_COLLAPSE: return "GapCollapse";
    case NEPV_ERR_NOT_A_SOLUTION: return "NotASolution";
    case NEPV_ERR_GAP_VIOLATION: return "GapViolation";
    case NEPV_ERR_INSUFFICIENT_HISTORY: return "InsufficientHistory";
    case NEPV_ERR_TOO_LARGE: return "TooLarge";
    case NEPV_ERR_NOT_SELF_ADJOINT: return "NotSelfAdjoint";
    case NEPV_ERR_INVALID_SPECTRUM: return "InvalidSpectrum";
    case NEPV_ERR_NO_ROOT_IN_RANGE: return "NoRootInRange";
    case NEPV_ERR_CERTIFICATION_FAILED: return "CertificationFailed";
    case NEPV_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* nepv_scf_status_name(nepv_scf_status status) {
  switch (status) {
    case NEPV_SCF_CONVERGED: return "Converged";
    case NEPV_SCF_MAX_ITER: return "MaxIter";
    case NEPV_SCF_DIVERGED: return "Diverged";
    case NEPV_SCF_GAP_COLLAPSE: return "GapCollapse";
  }
  return "Unknown";
}

const char* nepv_last_error(void) { return g_last_error.c_str(); }

nepv_error nepv_problem_kohn_sham(int n, int k, double alpha, nepv_problem** out) {
  return guarded([&] {
    if (!out) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null output");
    nepv::KohnShamParams params;
    params.n = n;
    params.k = k;
    params.alpha = alpha;
    *out = new nepv_problem{nepv::kohn_sham(params)};
  });
}

nepv_error nepv_problem_gpe(int grid_points, double half_width, double omega, double beta,
                            double (*potential)(double, double, void*), void* ctx,
                            nepv_problem** out) {
  return guarded([&] {
    if (!out || !potential) {
      throw nepv::Error(nepv::ErrorCode::InvalidParams, "null output or potential");
    }
    nepv::GpeParams params;
    params.grid_points = grid_points;
    params.half_width = half_width;
    params.omega = omega;
    params.beta = beta;
    params.potential = [potential, ctx](double x, double y) { return potential(x, y, ctx); };
    *out = new nepv_problem{nepv::gpe(params)};
  });
}

void nepv_problem_free(nepv_problem* problem) { delete problem; }

void nepv_problem_dims(const nepv_problem* problem, int* n, int* k) {
  if (n) *n = static_cast<int>(problem->impl.n);
  if (k) *k = static_cast<int>(problem->impl.k);
}

const char* nepv_problem_label(const nepv_problem* problem) {
  return problem->impl.label.c_str();
}

double nepv_problem_apriori_sigma(const nepv_problem* problem) {
  return problem->impl.apriori_sigma;
}

nepv_error nepv_problem_evaluate(const nepv_problem* problem, const nepv_complex* v,
                                 nepv_complex* h) {
  return guarded([&] {
    if (!v || !h) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null buffer");
    const auto& p = deref(problem).impl;
    from_matrix(p.evaluate(to_matrix(v, p.n, p.k)), h);
  });
}

void nepv_scf_options_init(nepv_scf_options* opts) {
  if (!opts) return;
  opts->max_iter = 5000;
  opts->tol_residual = 1e-12;
  opts->sigma = 0.0;
  opts->divergence_cap = 1e3;
  opts->record_subspace_errors = 0;
  opts->reference = nullptr;
}

nepv_error nepv_default_start(const nepv_problem* problem, unsigned long long seed,
                              nepv_complex* v0) {
  return guarded([&] {
    if (!v0) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null buffer");
    from_matrix(nepv::default_start(deref(problem).impl, seed).basis(), v0);
  });
}

nepv_error nepv_scf_run(const nepv_problem* problem, const nepv_complex* v0,
                        unsigned long long seed, const nepv_scf_options* opts,
                        nepv_history** out) {
  return guarded([&] {
    if (!out || !opts) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null argument");
    const auto& p = deref(problem).impl;
    nepv::ScfOptions run;
    run.max_iter = opts->max_iter;
    run.tol_residual = opts->tol_residual;
    run.sigma = opts->sigma;
    run.divergence_cap = opts->divergence_cap;
    run.record_subspace_errors = opts->record_subspace_errors != 0;
    run.reference = opts->reference ? &opts->reference->impl : nullptr;
    const nepv::Subspace start =
        v0 ? nepv::Subspace(to_matrix(v0, p.n, p.k)) : nepv::default_start(p, seed);
    *out = new nepv_history{nepv::scf_iterate(p, start, run)};
  });
}

void nepv_history_free(nepv_history* history) { delete history; }

int nepv_history_length(const nepv_history* history) {
  return static_cast<int>(history->impl.records.size());
}

int nepv_history_iterations(const nepv_history* history) { return history->impl.iterations; }

nepv_scf_status nepv_history_status(const nepv_history* history) {
  switch (history->impl.status) {
    case nepv::ScfStatus::Converged: return NEPV_SCF_CONVERGED;
    case nepv::ScfStatus::MaxIter: return NEPV_SCF_MAX_ITER;
    case nepv::ScfStatus::Diverged: return NEPV_SCF_DIVERGED;
    case nepv::ScfStatus::GapCollapse: return NEPV_SCF_GAP_COLLAPSE;
  }
  return NEPV_SCF_MAX_ITER;
}

double nepv_history_residual(const nepv_history* history, int i) {
  return history->impl.records.at(static_cast<std::size_t>(i)).residual;
}

double nepv_history_gap(const nepv_history* history, int i) {
  return history->impl.records.at(static_cast<std::size_t>(i)).gap;
}

int nepv_history_subspace_error(const nepv_history* history, int i, double* error) {
  const auto& rec = history->impl.records.at(static_cast<std::size_t>(i));
  if (!rec.has_subspace_error) return 0;
  if (error) *error = rec.subspace_error;
  return 1;
}

nepv_error nepv_history_final_v(const nepv_history* history, nepv_complex* v) {
  return guarded([&] {
    if (!v) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null buffer");
    from_matrix(deref(history).impl.final_v, v);
  });
}

nepv_error nepv_observed_rate(const nepv_history* history, int window, double* rate) {
  return guarded([&] {
    if (!rate) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null output");
    *rate = nepv::observed_rate(deref(history).impl, window);
  });
}

nepv_error nepv_certify(const nepv_problem* problem, const nepv_complex* v, double cert_tol,
                        nepv_certificate** out) {
  return guarded([&] {
    if (!out || !v) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null argument");
    const auto& p = deref(problem).impl;
    *out = new nepv_certificate{
        nepv::certify(p, nepv::Subspace(to_matrix(v, p.n, p.k)), cert_tol)};
  });
}

nepv_error nepv_ground_truth(const nepv_problem* problem, double tol, int max_iter,
                             unsigned long long seed, nepv_certificate** out,
                             double* sigma_used, int* plain_converged) {
  return guarded([&] {
    if (!out) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null output");
    nepv::GroundTruth truth = nepv::ground_truth(deref(problem).impl, tol, max_iter, seed);
    if (sigma_used) *sigma_used = truth.sigma_used;
    if (plain_converged) *plain_converged = truth.plain_converged ? 1 : 0;
    *out = new nepv_certificate{std::move(truth.cert)};
  });
}

void nepv_certificate_free(nepv_certificate* cert) { delete cert; }

double nepv_certificate_delta(const nepv_certificate* cert) { return cert->impl.delta_star; }

double nepv_certificate_span(const nepv_certificate* cert) { return cert->impl.s_star; }

double nepv_certificate_residual(const nepv_certificate* cert) { return cert->impl.residual; }

nepv_error nepv_certificate_eigenvalues(const nepv_certificate* cert, double* lam) {
  return guarded([&] {
    if (!lam) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null buffer");
    const auto& values = deref(cert).impl.eigenvalues;
    std::memcpy(lam, values.data(), sizeof(double) * static_cast<std::size_t>(values.size()));
  });
}

nepv_error nepv_certificate_vstar(const nepv_certificate* cert, nepv_complex* v) {
  return guarded([&] {
    if (!v) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null buffer");
    from_matrix(deref(cert).impl.vstar, v);
  });
}

nepv_error nepv_spectral_radius(const nepv_problem* problem, const nepv_certificate* cert,
                                double sigma, double* rho) {
  return guarded([&] {
    if (!rho) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null output");
    *rho = nepv::spectral_radius(nepv::local_operator(deref(problem).impl, deref(cert).impl, sigma));
  });
}

nepv_error nepv_operator_norm(const nepv_problem* problem, const nepv_certificate* cert,
                              double sigma, double* eta) {
  return guarded([&] {
    if (!eta) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null output");
    *eta = nepv::operator_norm_frobenius(nepv::local_operator(deref(problem).impl, deref(cert).impl, sigma));
  });
}

nepv_error nepv_eta_czbl(const nepv_problem* problem, const nepv_certificate* cert,
                         double* eta) {
  return guarded([&] {
    if (!eta) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null output");
    *eta = nepv::eta_czbl(deref(problem).impl, deref(cert).impl);
  });
}

nepv_error nepv_eta_m(const nepv_problem* problem, const nepv_certificate* cert, int m,
                      double sigma, double* eta) {
  return guarded([&] {
    if (!eta) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null output");
    *eta = nepv::eta_m(deref(problem).impl, deref(cert).impl, m, sigma);
  });
}

nepv_error nepv_q_extremes(const nepv_problem* problem, const nepv_certificate* cert,
                           double* mu_min, double* mu_max) {
  return guarded([&] {
    const nepv::QExtremes q = nepv::q_extremes(deref(problem).impl, deref(cert).impl);
    if (mu_min) *mu_min = q.mu_min;
    if (mu_max) *mu_max = q.mu_max;
  });
}

nepv_error nepv_rho_sigma_bound(double mu_min, double mu_max, double delta_star, double s_star,
                                double sigma, double* bound) {
  return guarded([&] {
    if (!bound) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null output");
    *bound = nepv::rho_sigma_bound(mu_min, mu_max, delta_star, s_star, sigma);
  });
}

nepv_error nepv_sigma_lower_bound(double mu_max, double delta_star, double* sigma) {
  return guarded([&] {
    if (!sigma) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null output");
    *sigma = nepv::sigma_lower_bound(mu_max, delta_star);
  });
}

nepv_error nepv_apriori_sigma_ks(double alpha, int n, double* sigma) {
  return guarded([&] {
    if (!sigma) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null output");
    *sigma = nepv::apriori_sigma_ks(alpha, n);
  });
}

nepv_error nepv_optimal_sigma(double mu_min, double mu_max, double delta_star, double s_star,
                              double* sigma) {
  return guarded([&] {
    if (!sigma) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null output");
    *sigma = nepv::optimal_sigma(mu_min, mu_max, delta_star, s_star);
  });
}

nepv_error nepv_compute_rates(const nepv_problem* problem, double sigma, double tol,
                              int max_iter, int window, unsigned long long seed,
                              nepv_rate_report* out) {
  return guarded([&] {
    if (!out) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null output");
    nepv::RateOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    opts.window = window;
    opts.seed = seed;
    fill_report(nepv::compute_rates(deref(problem).impl, sigma, opts), out);
  });
}

nepv_error nepv_rates_with_certificate(const nepv_problem* problem,
                                       const nepv_certificate* cert, double sigma, double tol,
                                       int max_iter, int window, unsigned long long seed,
                                       int with_observed, nepv_rate_report* out) {
  return guarded([&] {
    if (!out) throw nepv::Error(nepv::ErrorCode::InvalidParams, "null output");
    nepv::RateOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    opts.window = window;
    opts.seed = seed;
    opts.with_observed = with_observed != 0;
    fill_report(nepv::rates_with_certificate(deref(problem).impl, deref(cert).impl, sigma, opts), out);
  });
}

}  // extern "C"
