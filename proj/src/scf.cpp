// Copyright (c) nepv contributors
// SPDX-License-Identifier: Apache-2.0

#include "nepv/scf.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace nepv {

namespace {

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

struct ErrorSeries {
  std::vector<double> values;
};

ErrorSeries pick_errors(const IterationHistory& history) {
  ErrorSeries out;
  out.values.reserve(history.records.size());
  const bool use_subspace = !history.records.empty() &&
                            std::all_of(history.records.begin(), history.records.end(),
                                        [](const IterationRecord& r) { return r.has_subspace_error; });
  for (const auto& rec : history.records) {
    out.values.push_back(use_subspace ? rec.subspace_error : rec.residual);
  }
  return out;
}

}  // namespace

const char* to_string(ScfStatus status) {
  switch (status) {
    case ScfStatus::Converged: return "Converged";
    case ScfStatus::MaxIter: return "MaxIter";
    case ScfStatus::Diverged: return "Diverged";
    case ScfStatus::GapCollapse: return "GapCollapse";
  }
  return "Unknown";
}

IterationHistory scf_iterate(const NepvProblem& problem, const Subspace& v0,
                             const ScfOptions& opts) {
  if (opts.max_iter < 1 || opts.tol_residual <= 0 ||
      opts.divergence_cap <= opts.tol_residual) {
    throw Error(ErrorCode::InvalidParams, "scf options out of range");
  }
  if (opts.record_subspace_errors && opts.reference == nullptr) {
    throw Error(ErrorCode::InvalidParams, "subspace-error recording needs a reference");
  }
  if (v0.n() != problem.n || v0.k() != problem.k) {
    throw Error(ErrorCode::DimensionMismatch, "start dimensions differ from problem");
  }

  const Eigen::Index k = problem.k;
  IterationHistory history;
  Matrix v = v0.basis();
  Matrix lambda;
  int i = 0;
  while (true) {
    const Matrix h = symmetrized(problem.evaluate(v));
    lambda = v.adjoint() * h * v;
    const double residual = spectral_norm(h * v - v * lambda);

    Matrix shifted = h;
    if (opts.sigma != 0.0) shifted -= opts.sigma * (v * v.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(shifted));
    if (es.info() != Eigen::Success) {
      throw Error(ErrorCode::BackendFailure, "SCF eigendecomposition failed");
    }
    const double gap = es.eigenvalues()(k) - es.eigenvalues()(k - 1);

    IterationRecord rec;
    rec.residual = residual;
    rec.gap = gap;
    if (opts.record_subspace_errors) {
      rec.subspace_error =
          tangent_angle_matrix(Subspace(v), *opts.reference).norm();
      rec.has_subspace_error = true;
    }
    history.records.push_back(rec);

    if (i >= 1 && residual <= opts.tol_residual) {
      history.status = ScfStatus::Converged;
      break;
    }
    if (residual > opts.divergence_cap) {
      history.status = ScfStatus::Diverged;
      break;
    }
    if (gap < kTolGap) {
      history.status = ScfStatus::GapCollapse;
      break;
    }
    if (i == opts.max_iter) {
      history.status = ScfStatus::MaxIter;
      break;
    }
    v = es.eigenvectors().leftCols(k);
    ++i;
  }
  history.final_v = std::move(v);
  history.final_lambda = std::move(lambda);
  history.iterations = i;
  return history;
}

SolutionCertificate certify(const NepvProblem& problem, const Subspace& v, double cert_tol) {
  if (cert_tol <= 0) throw Error(ErrorCode::InvalidParams, "cert_tol must be positive");
  const Eigen::Index k = problem.k;
  const Matrix h = symmetrized(problem.evaluate(v.basis()));
  const Matrix lambda = v.basis().adjoint() * h * v.basis();
  const double residual_in = spectral_norm(h * v.basis() - v.basis() * lambda);
  if (residual_in > cert_tol) {
    throw Error(ErrorCode::NotASolution, "residual " + std::to_string(residual_in));
  }

  HermitianEig eig = hermitian_eig(h);
  const double delta = eig.eigenvalues(k) - eig.eigenvalues(k - 1);
  if (delta <= kTolGap) {
    throw Error(ErrorCode::GapViolation, "eigenvalue gap " + std::to_string(delta));
  }

  // V must span the lowest-k eigenspace, not just some invariant subspace.
  // sin of the largest canonical angle, computed cancellation-free through
  // the complement block.
  const double sin_max_angle =
      spectral_norm(eig.eigenvectors.rightCols(problem.n - k).adjoint() * v.basis());
  if (sin_max_angle > std::max(1e-8, 10.0 * residual_in / delta)) {
    throw Error(ErrorCode::NotASolution, "V does not span the lowest-k eigenspace");
  }

  SolutionCertificate cert;
  cert.vstar = eig.eigenvectors.leftCols(k);
  cert.vstar_perp = eig.eigenvectors.rightCols(problem.n - k);
  cert.eigenvalues = eig.eigenvalues;
  cert.delta_star = delta;
  cert.s_star = eig.eigenvalues(problem.n - 1) - eig.eigenvalues(0);

  const Matrix h_star = symmetrized(problem.evaluate(cert.vstar));
  const Matrix lambda_star = cert.vstar.adjoint() * h_star * cert.vstar;
  cert.residual = spectral_norm(h_star * cert.vstar - cert.vstar * lambda_star);
  if (cert.residual > cert_tol) {
    throw Error(ErrorCode::NotASolution,
                "re-evaluated residual " + std::to_string(cert.residual));
  }
  return cert;
}

double observed_rate(const IterationHistory& history, int window) {
  if (window < 1) throw Error(ErrorCode::InvalidParams, "window must be >= 1");
  const ErrorSeries series = pick_errors(history);
  const auto& e = series.values;
  if (static_cast<int>(e.size()) < window + 1) {
    throw Error(ErrorCode::InsufficientHistory,
                "need " + std::to_string(window + 1) + " records, have " +
                    std::to_string(e.size()));
  }

  double emin = std::numeric_limits<double>::infinity();
  for (double v : e) {
    if (v > 0) emin = std::min(emin, v);
  }
  if (!std::isfinite(emin)) return 0.0;  // every error is exactly zero

  // Keep the fit window clear of the measurement floor.
  const double floor_guard = 1e4 * emin;
  std::size_t end = e.size() - 1;
  for (std::size_t j = e.size(); j-- > 0;) {
    if (e[j] >= floor_guard) {
      end = j;
      break;
    }
  }
  const std::size_t lo = end >= static_cast<std::size_t>(window) ? end - window : 0;
  if (end == lo) {
    throw Error(ErrorCode::InsufficientHistory, "window collapsed to a single point");
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double count = static_cast<double>(end - lo + 1);
  for (std::size_t j = lo; j <= end; ++j) {
    if (e[j] <= 0) return 0.0;  // hit exact zero inside the window
    const double x = static_cast<double>(j);
    const double y = std::log(e[j]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return std::exp(slope);
}

Subspace default_start(const NepvProblem& problem, std::uint64_t seed) {
  if (problem.real_coefficients) {
    // Zero-coupling eigenbasis (the Laplacian basis for the Kohn-Sham model).
    const Matrix h0 = problem.evaluate(Matrix::Zero(problem.n, problem.k));
    HermitianEig eig = hermitian_eig(h0);
    return Subspace(eig.eigenvectors.leftCols(problem.k));
  }
  // Random starts avoid symmetry-invariant manifolds of structured complex
  // problems, which otherwise hide the slowest error mode.
  std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(problem.n, problem.k);
  for (Eigen::Index j = 0; j < problem.k; ++j)
    for (Eigen::Index i = 0; i < problem.n; ++i) m(i, j) = Complex(normal(gen), normal(gen));
  return orthonormalize(m);
}

GroundTruth ground_truth(const NepvProblem& problem, double tol, int max_iter,
                         std::uint64_t seed, double cert_tol) {
  const Subspace v0 = default_start(problem, seed);
  ScfOptions opts;
  opts.tol_residual = tol;
  opts.max_iter = max_iter;
  IterationHistory plain = scf_iterate(problem, v0, opts);

  GroundTruth out;
  if (plain.records.back().residual <= cert_tol) {
    out.cert = certify(problem, Subspace(plain.final_v), cert_tol);
    out.plain_converged = true;
    out.sigma_used = 0.0;
    return out;
  }

  ScfOptions shifted = opts;
  shifted.sigma = problem.apriori_sigma;
  shifted.max_iter = std::max(max_iter, 20000);
  IterationHistory fallback = scf_iterate(problem, v0, shifted);
  if (fallback.records.back().residual > cert_tol) {
    throw Error(ErrorCode::CertificationFailed,
                "level-shifted fallback did not converge (status " +
                    std::string(to_string(fallback.status)) + ")");
  }
  out.cert = certify(problem, Subspace(fallback.final_v), cert_tol);
  out.plain_converged = false;
  out.sigma_used = shifted.sigma;
  return out;
}

}  // namespace nepv
