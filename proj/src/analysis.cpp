// Copyright (c) nepv contributors
// SPDX-License-Identifier: Apache-2.0

#include "nepv/analysis.hpp"

#include <cmath>
#include <random>

namespace nepv {

namespace {

Eigen::VectorXd lower_eigs(const SolutionCertificate& cert) {
  return cert.eigenvalues.head(cert.k());
}

Eigen::VectorXd upper_eigs(const SolutionCertificate& cert) {
  return cert.eigenvalues.tail(cert.n() - cert.k());
}

Matrix basis_element(Eigen::Index rows, Eigen::Index cols, Eigen::Index index,
                     OperatorField field) {
  const Eigen::Index n = rows * cols;
  Matrix z = Matrix::Zero(rows, cols);
  const Eigen::Index flat = field == OperatorField::Complex && index >= n ? index - n : index;
  const Complex unit =
      field == OperatorField::Complex && index >= n ? Complex(0.0, 1.0) : Complex(1.0, 0.0);
  z(flat % rows, flat / rows) = unit;
  return z;
}

RealMatrix matrix_power(RealMatrix base, int exponent) {
  RealMatrix result = RealMatrix::Identity(base.rows(), base.cols());
  while (exponent > 0) {
    if (exponent & 1) result = result * base;
    exponent >>= 1;
    if (exponent) base = base * base;
  }
  return result;
}

double largest_singular_value(const RealMatrix& m) {
  Eigen::BDCSVD<RealMatrix> svd(m);
  return svd.singularValues()(0);
}

Matrix random_tangent(Eigen::Index rows, Eigen::Index cols, OperatorField field,
                      std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      z(i, j) = field == OperatorField::Real ? Complex(normal(gen), 0.0)
                                             : Complex(normal(gen), normal(gen));
  return z;
}

}  // namespace

Eigen::ArrayXXd gap_matrix(const SolutionCertificate& cert, double sigma) {
  if (sigma <= -cert.delta_star + kTolGap) {
    throw Error(ErrorCode::ShiftOutOfRange,
                "sigma must exceed -delta* = " + std::to_string(-cert.delta_star));
  }
  const Eigen::VectorXd lo = lower_eigs(cert);
  const Eigen::VectorXd hi = upper_eigs(cert);
  Eigen::ArrayXXd d(hi.size(), lo.size());
  for (Eigen::Index i = 0; i < hi.size(); ++i)
    for (Eigen::Index j = 0; j < lo.size(); ++j) d(i, j) = 1.0 / (hi(i) - lo(j) + sigma);
  return d;
}

Matrix sylvester_solution(const NepvProblem& problem, const SolutionCertificate& cert,
                          const Subspace& v, double sigma) {
  const Eigen::ArrayXXd d = gap_matrix(cert, sigma);
  const Matrix h_star = problem.evaluate(cert.vstar);
  const Matrix h_v = problem.evaluate(v.basis());
  Matrix diff = h_star - h_v;
  if (sigma != 0.0) {
    diff -= sigma * (cert.vstar * cert.vstar.adjoint() - v.basis() * v.basis().adjoint());
  }
  const Matrix rhs = cert.vstar_perp.adjoint() * diff * cert.vstar;
  return (d * rhs.array()).matrix();
}

RealLinearMap local_operator(const NepvProblem& problem, const SolutionCertificate& cert,
                             double sigma) {
  const Eigen::ArrayXXd d = gap_matrix(cert, sigma);
  const Matrix vs = cert.vstar;
  const Matrix vp = cert.vstar_perp;
  auto derivative = problem.derivative;

  RealLinearMap op;
  op.rows = cert.n() - cert.k();
  op.cols = cert.k();
  op.field = problem.real_coefficients ? OperatorField::Real : OperatorField::Complex;
  op.act = [d, vs, vp, derivative, sigma](const Matrix& z) {
    const Matrix x = vp * z;
    Matrix dh = derivative(vs, x);
    if (sigma != 0.0) dh -= sigma * (vs * x.adjoint() + x * vs.adjoint());
    return Matrix(-(d * (vp.adjoint() * dh * vs).array()).matrix());
  };
  if (problem.has_analytic_adjoint && sigma == 0.0 && problem.local_adjoint) {
    auto local_adjoint = problem.local_adjoint;
    op.analytic_adjoint = [d, vs, vp, local_adjoint](const Matrix& y) {
      return local_adjoint(vs, vp, d, y);
    };
  }

  // Two-path consistency probe: the same operator through the restricted
  // derivative identity L_sigma = I - D_sigma . Q.
  {
    const Eigen::VectorXd lo = lower_eigs(cert);
    const Eigen::VectorXd hi = upper_eigs(cert);
    std::mt19937_64 gen(42);
    const Matrix z = random_tangent(op.rows, op.cols, op.field, gen);
    const Matrix q = vp.adjoint() * derivative(vs, vp * z) * vs +
                     hi.cast<Complex>().asDiagonal() * z - z * lo.cast<Complex>().asDiagonal();
    const Matrix via_identity = z - (d * q.array()).matrix();
    const double mismatch = (op.act(z) - via_identity).norm();
    if (mismatch > 1e-10 * std::max(z.norm(), 1e-300)) {
      throw Error(ErrorCode::BackendFailure,
                  "local operator two-path mismatch " + std::to_string(mismatch));
    }
  }
  return op;
}

RealLinearMap restricted_derivative(const NepvProblem& problem,
                                    const SolutionCertificate& cert) {
  const Matrix vs = cert.vstar;
  const Matrix vp = cert.vstar_perp;
  const Eigen::VectorXd lo = lower_eigs(cert);
  const Eigen::VectorXd hi = upper_eigs(cert);
  auto derivative = problem.derivative;

  RealLinearMap op;
  op.rows = cert.n() - cert.k();
  op.cols = cert.k();
  op.field = problem.real_coefficients ? OperatorField::Real : OperatorField::Complex;
  op.act = [vs, vp, lo, hi, derivative](const Matrix& z) {
    return Matrix(vp.adjoint() * derivative(vs, vp * z) * vs +
                  hi.cast<Complex>().asDiagonal() * z - z * lo.cast<Complex>().asDiagonal());
  };
  return op;
}

RealLinearMap czbl_operator(const NepvProblem& problem, const SolutionCertificate& cert) {
  const Matrix vs = cert.vstar;
  const Matrix vp = cert.vstar_perp;
  auto derivative = problem.derivative;

  RealLinearMap op;
  op.rows = cert.n() - cert.k();
  op.cols = cert.k();
  op.field = problem.real_coefficients ? OperatorField::Real : OperatorField::Complex;
  op.act = [vs, vp, derivative](const Matrix& z) {
    return Matrix(vp.adjoint() * derivative(vs, vp * z) * vs);
  };
  return op;
}

Vector m2v(const Matrix& z, OperatorField field) {
  const Eigen::Index n = z.size();
  if (field == OperatorField::Real) {
    Vector v(n);
    v = z.real().reshaped();
    return v;
  }
  Vector v(2 * n);
  v.head(n) = z.real().reshaped();
  v.tail(n) = z.imag().reshaped();
  return v;
}

Matrix v2m(const Vector& x, Eigen::Index rows, Eigen::Index cols, OperatorField field) {
  const Eigen::Index n = rows * cols;
  if (x.size() != (field == OperatorField::Real ? n : 2 * n)) {
    throw Error(ErrorCode::DimensionMismatch, "vector length does not match shape");
  }
  Matrix z(rows, cols);
  z.real() = x.head(n).reshaped(rows, cols);
  z.imag() = field == OperatorField::Real ? RealMatrix::Zero(rows, cols)
                                          : RealMatrix(x.tail(n).reshaped(rows, cols));
  return z;
}

RealMatrix realify(const RealLinearMap& op) {
  if (op.rows * op.cols > kRealifyCap) {
    throw Error(ErrorCode::TooLarge, "tangent space dimension exceeds realify cap");
  }
  const Eigen::Index dim = op.real_dim();
  RealMatrix rep(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    rep.col(c) = m2v(op.act(basis_element(op.rows, op.cols, c, op.field)), op.field);
  }
  return rep;
}

double spectral_radius(const RealLinearMap& op) {
  const RealMatrix rep = realify(op);
  Eigen::EigenSolver<RealMatrix> es(rep, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::BackendFailure, "real eigendecomposition failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double operator_norm_frobenius(const RealLinearMap& op) {
  return largest_singular_value(realify(op));
}

RealLinearMap adjoint(const RealLinearMap& op) {
  const RealMatrix rep_t = realify(op).transpose();
  const Eigen::Index rows = op.rows;
  const Eigen::Index cols = op.cols;
  const OperatorField field = op.field;
  auto transpose_act = [rep_t, rows, cols, field](const Matrix& y) {
    return v2m(rep_t * m2v(y, field), rows, cols, field);
  };

  RealLinearMap out;
  out.rows = rows;
  out.cols = cols;
  out.field = field;
  if (op.analytic_adjoint) {
    std::mt19937_64 gen(1234);
    for (int trial = 0; trial < 4; ++trial) {
      const Matrix y = random_tangent(rows, cols, field, gen);
      const double mismatch = (op.analytic_adjoint(y) - transpose_act(y)).norm();
      if (mismatch > 1e-10 * y.norm()) {
        throw Error(ErrorCode::BackendFailure,
                    "analytic adjoint disagrees with transposed representation by " +
                        std::to_string(mismatch));
      }
    }
    out.act = op.analytic_adjoint;
    out.analytic_adjoint = op.act;  // (L*)* = L
  } else {
    out.act = transpose_act;
  }
  return out;
}

double eta_czbl(const NepvProblem& problem, const SolutionCertificate& cert) {
  return operator_norm_frobenius(czbl_operator(problem, cert)) / cert.delta_star;
}

double eta_m(const NepvProblem& problem, const SolutionCertificate& cert, int m, double sigma) {
  if (m < 1) throw Error(ErrorCode::InvalidParams, "m must be >= 1");
  const RealMatrix rep = realify(local_operator(problem, cert, sigma));
  return std::pow(largest_singular_value(matrix_power(rep, m)), 1.0 / static_cast<double>(m));
}

QExtremes q_extremes(const NepvProblem& problem, const SolutionCertificate& cert) {
  const RealMatrix rep = realify(restricted_derivative(problem, cert));
  QExtremes out;
  out.self_adjoint_defect = (rep - rep.transpose()).norm() / std::max(rep.norm(), 1e-300);
  if (out.self_adjoint_defect > 1e-8) {
    throw Error(ErrorCode::NotSelfAdjoint,
                "Q defect " + std::to_string(out.self_adjoint_defect));
  }
  const RealMatrix sym = 0.5 * (rep + rep.transpose());
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(sym);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::BackendFailure, "Q eigendecomposition failed");
  }
  out.mu_min = es.eigenvalues()(0);
  out.mu_max = es.eigenvalues()(es.eigenvalues().size() - 1);
  out.positive_definite = out.mu_min > 0.0;
  return out;
}

double rho_sigma_bound(double mu_min, double mu_max, double delta_star, double s_star,
                       double sigma) {
  if (mu_min <= 0 || mu_min > mu_max) {
    throw Error(ErrorCode::InvalidSpectrum, "need 0 < mu_min <= mu_max");
  }
  if (sigma <= -delta_star) {
    throw Error(ErrorCode::ShiftOutOfRange, "sigma must exceed -delta*");
  }
  return std::max(std::abs(mu_max / (sigma + delta_star) - 1.0),
                  std::abs(mu_min / (sigma + s_star) - 1.0));
}

double sigma_lower_bound(double mu_max, double delta_star) {
  return 0.5 * mu_max - delta_star;
}

double apriori_sigma_ks(double alpha, Eigen::Index n) {
  if (alpha < 0 || n < 2) throw Error(ErrorCode::InvalidParams, "alpha >= 0, n >= 2");
  return 1.5 * alpha * laplacian_inverse_norm(n) + 2.0;
}

double apriori_sigma_gpe(double beta, const Matrix& a_f) {
  if (beta < 0) throw Error(ErrorCode::InvalidParams, "beta must be >= 0");
  const HermitianEig eig = hermitian_eig(a_f);
  const double norm2 = std::max(std::abs(eig.eigenvalues(0)),
                                std::abs(eig.eigenvalues(eig.eigenvalues.size() - 1)));
  return 0.5 * (3.0 * beta + norm2);
}

double optimal_sigma(double mu_min, double mu_max, double delta_star, double s_star) {
  if (mu_min <= 0 || mu_min > mu_max || delta_star <= 0 || delta_star > s_star) {
    throw Error(ErrorCode::InvalidSpectrum, "inconsistent spectrum inputs");
  }
  // Branch equality mu_max/(s+d) - 1 = 1 - mu_min/(s+s_), i.e. the quadratic
  // 2 s^2 + b s + c = 0 on (-delta*, inf).
  const double b = 2.0 * (delta_star + s_star) - mu_max - mu_min;
  const double c = 2.0 * delta_star * s_star - mu_max * s_star - mu_min * delta_star;
  const double disc = b * b - 8.0 * c;
  if (disc < 0) throw Error(ErrorCode::NoRootInRange, "negative discriminant");
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + (b >= 0 ? sq : -sq));
  const double roots[2] = {q / 2.0, c != 0.0 ? c / q : -b / 2.0 - q / 2.0};
  for (double root : roots) {
    if (!(root > -delta_star)) continue;
    const double lhs = mu_max / (root + delta_star) - 1.0;
    const double rhs = 1.0 - mu_min / (root + s_star);
    if (std::abs(lhs - rhs) <= 1e-9 * (1.0 + std::abs(lhs))) return root;
  }
  throw Error(ErrorCode::NoRootInRange, "no branch-equalizing shift above -delta*");
}

RateReport compute_rates(const NepvProblem& problem, double sigma, const RateOptions& opts) {
  const GroundTruth truth = ground_truth(problem, 1e-14, opts.max_iter, opts.seed);
  RateReport report = rates_with_certificate(problem, truth.cert, sigma, opts);
  report.sigma_used_for_truth = truth.sigma_used;
  report.plain_converged = truth.plain_converged;
  return report;
}

RateReport rates_with_certificate(const NepvProblem& problem, const SolutionCertificate& cert,
                                  double sigma, const RateOptions& opts) {
  RateReport report;
  report.label = problem.label;
  report.sigma = sigma;
  report.delta_star = cert.delta_star;
  report.s_star = cert.s_star;

  const RealMatrix rep = realify(local_operator(problem, cert, sigma));
  Eigen::EigenSolver<RealMatrix> es(rep, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::BackendFailure, "operator eigendecomposition failed");
  }
  report.eta_sup_infty = es.eigenvalues().cwiseAbs().maxCoeff();
  report.eta_sup = largest_singular_value(rep);
  report.eta_czbl = eta_czbl(problem, cert);
  report.normality_defect = (rep * rep.transpose() - rep.transpose() * rep).norm() /
                            std::max(rep.squaredNorm(), 1e-300);

  const QExtremes qe = q_extremes(problem, cert);
  report.mu_min = qe.mu_min;
  report.mu_max = qe.mu_max;
  report.rho_bound = qe.positive_definite && sigma > -cert.delta_star
                         ? rho_sigma_bound(qe.mu_min, qe.mu_max, cert.delta_star, cert.s_star,
                                           sigma)
                         : std::numeric_limits<double>::quiet_NaN();

  // Observed rate from a fresh run at the evaluation shift, with subspace
  // errors measured against the certificate.
  if (opts.with_observed) {
    ScfOptions run;
    run.tol_residual = opts.tol;
    run.max_iter = opts.max_iter;
    run.sigma = sigma;
    run.record_subspace_errors = true;
    run.reference = &cert;
    const IterationHistory history =
        scf_iterate(problem, default_start(problem, opts.seed), run);
    if (history.status == ScfStatus::Converged) {
      const int have = static_cast<int>(history.records.size());
      int window = opts.window;
      if (have < window + 1) window = have - 11;  // all iterations past the first 10
      if (window >= 1) report.observed = observed_rate(history, window);
    }
  }
  return report;
}

}  // namespace nepv
