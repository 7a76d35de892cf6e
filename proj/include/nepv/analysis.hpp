// Copyright (c) nepv contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <string>

#include "nepv/scf.hpp"

namespace nepv {

/// Field over which an operator on (n-k) x k tangent matrices acts.  Real
/// problems (real H, real iterates) keep the N-dimensional real tangent
/// space; complex problems use C^{(n-k) x k} viewed over R (dimension 2N).
enum class OperatorField { Real, Complex };

/// An R-linear operator on tangent-angle matrices with a matrix-free action.
struct RealLinearMap {
  Eigen::Index rows = 0;  // n - k
  Eigen::Index cols = 0;  // k
  OperatorField field = OperatorField::Complex;
  std::function<Matrix(const Matrix&)> act;
  std::function<Matrix(const Matrix&)> analytic_adjoint;  // optional

  Eigen::Index real_dim() const {
    return (field == OperatorField::Real ? 1 : 2) * rows * cols;
  }
};

inline constexpr Eigen::Index kRealifyCap = 20000;

/// Entrywise reciprocals of the sigma-shifted eigenvalue gaps,
/// D_{ij} = (lambda_{k+i} - lambda_j + sigma)^{-1}.  Requires
/// sigma > -delta_star.
Eigen::ArrayXXd gap_matrix(const SolutionCertificate& cert, double sigma);

/// Unique solution of the shifted Sylvester equation
///   Lambda_perp X - X Lambda + sigma X = Vp^H [H_sigma(V*) - H_sigma(V)] Vs.
Matrix sylvester_solution(const NepvProblem& problem, const SolutionCertificate& cert,
                          const Subspace& v, double sigma);

/// The local error propagator of the (level-shifted) SCF at V*:
///   L_sigma(Z) = Z - D_sigma ∘ Q(Z)
///              = -D_sigma ∘ (Vp^H DH_sigma(V*)[Vp Z] Vs),
/// so that T(V_{i+1}) = L_sigma(T(V_i)) + o(T(V_i)).  Carries the analytic
/// adjoint when the problem provides one (sigma = 0 only).
RealLinearMap local_operator(const NepvProblem& problem, const SolutionCertificate& cert,
                             double sigma);

/// Restricted derivative operator Q(Z) = Vp^H DH(V*)[Vp Z] Vs
///                                      + Lambda_perp Z - Z Lambda.
RealLinearMap restricted_derivative(const NepvProblem& problem,
                                    const SolutionCertificate& cert);

/// The unscaled derivative block Z -> Vp^H DH(V*)[Vp Z] Vs.
RealLinearMap czbl_operator(const NepvProblem& problem, const SolutionCertificate& cert);

/// Dense matrix representation of the operator over its field: N x N for
/// real ops, 2N x 2N for complex ones using the (vec Re, vec Im) layout.
RealMatrix realify(const RealLinearMap& op);

/// Vectorization helpers matching realify's layout.
Vector m2v(const Matrix& z, OperatorField field);
Matrix v2m(const Vector& x, Eigen::Index rows, Eigen::Index cols, OperatorField field);

double spectral_radius(const RealLinearMap& op);
double operator_norm_frobenius(const RealLinearMap& op);

/// Adjoint with respect to <X,Y> = Re tr(X^H Y).  Returns the operator's
/// analytic adjoint when present (after cross-checking it against the
/// transposed representation), the transposed representation otherwise.
RealLinearMap adjoint(const RealLinearMap& op);

/// delta*^{-1} |||Z -> Vp^H DH(V*)[Vp Z] Vs|||_F, the upper-bound factor of
/// the sin-theta contraction analysis.
double eta_czbl(const NepvProblem& problem, const SolutionCertificate& cert);

/// m-step average contraction factor (|||L_sigma^m|||_F)^{1/m}.
double eta_m(const NepvProblem& problem, const SolutionCertificate& cert, int m, double sigma);

struct QExtremes {
  double mu_min = 0.0;
  double mu_max = 0.0;
  double self_adjoint_defect = 0.0;  // relative, pre-symmetrization
  bool positive_definite = false;
};

/// Extreme eigenvalues of (the symmetrized representation of) Q.  Throws
/// NotSelfAdjoint when the relative defect exceeds 1e-8; mu_min <= 0 is
/// reported through the flag, not an error.
QExtremes q_extremes(const NepvProblem& problem, const SolutionCertificate& cert);

/// Spectral-radius bound max{ |mu_max/(sigma+delta*) - 1|,
///                            |mu_min/(sigma+s*) - 1| }.
double rho_sigma_bound(double mu_min, double mu_max, double delta_star, double s_star,
                       double sigma);

/// Smallest shift guaranteeing local convergence: mu_max/2 - delta*.
double sigma_lower_bound(double mu_max, double delta_star);

/// A-priori shifts: (3/2) alpha ||L^{-1}||_2 + 2 for the Kohn-Sham model and
/// (3 beta + ||A_f||_2)/2 for the GPE model.
double apriori_sigma_ks(double alpha, Eigen::Index n);
double apriori_sigma_gpe(double beta, const Matrix& a_f);

/// The unique sigma in (-delta*, inf) equalizing the two branches of
/// rho_sigma_bound.
double optimal_sigma(double mu_min, double mu_max, double delta_star, double s_star);

/// The rate bundle for one configuration.
struct RateReport {
  std::string label;
  double sigma = 0.0;  // evaluation shift
  double eta_sup_infty = 0.0;
  double eta_sup = 0.0;
  double eta_czbl = 0.0;
  std::optional<double> observed;
  double delta_star = 0.0;
  double s_star = 0.0;
  double mu_min = 0.0;
  double mu_max = 0.0;
  double sigma_used_for_truth = 0.0;
  bool plain_converged = false;
  double rho_bound = 0.0;         // Theorem bound at `sigma`
  double normality_defect = 0.0;  // ||LL^T - L^T L||_F / ||L||_F^2, diagnostic
};

struct RateOptions {
  double tol = 1e-13;      // stopping tolerance of the measurement run
  int max_iter = 5000;
  int window = 30;
  std::uint64_t seed = 0;
  bool with_observed = true;  // skip the measurement run when false
};

/// Full pipeline: ground truth, certificate, operator quantities at `sigma`,
/// and the observed rate of a fresh SCF run at `sigma` (absent when that run
/// does not converge).
RateReport compute_rates(const NepvProblem& problem, double sigma, const RateOptions& opts);

/// Same bundle against an existing certificate (lets sigma sweeps reuse one
/// ground truth); sigma_used_for_truth/plain_converged are left to the caller.
RateReport rates_with_certificate(const NepvProblem& problem, const SolutionCertificate& cert,
                                  double sigma, const RateOptions& opts);

}  // namespace nepv
