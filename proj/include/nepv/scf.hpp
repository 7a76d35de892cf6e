// Copyright (c) nepv contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "nepv/problems.hpp"

namespace nepv {

enum class ScfStatus { Converged, MaxIter, Diverged, GapCollapse };

const char* to_string(ScfStatus status);

/// A converged solution V* together with the eigen-decomposition of H(V*).
/// [vstar, vstar_perp] is unitary; eigenvalues ascending; delta_star =
/// lambda_{k+1} - lambda_k > 0; s_star = lambda_n - lambda_1.
struct SolutionCertificate {
  Matrix vstar;
  Matrix vstar_perp;
  Vector eigenvalues;
  double delta_star = 0.0;
  double s_star = 0.0;
  double residual = 0.0;

  Eigen::Index n() const { return vstar.rows(); }
  Eigen::Index k() const { return vstar.cols(); }
};

struct ScfOptions {
  int max_iter = 5000;
  double tol_residual = 1e-12;
  double sigma = 0.0;           // 0 = plain SCF
  double divergence_cap = 1e3;  // abort when the residual exceeds this
  bool record_subspace_errors = false;
  const SolutionCertificate* reference = nullptr;  // required for error recording
};

struct IterationRecord {
  double residual = 0.0;       // ||H(V_i)V_i - V_i Lambda_i||_2, unshifted
  double gap = 0.0;            // lambda_{k+1} - lambda_k of H_sigma(V_i)
  double subspace_error = 0.0; // ||tan Theta(V_i, V*)||_F when recorded
  bool has_subspace_error = false;
};

struct IterationHistory {
  std::vector<IterationRecord> records;  // entries for iterates V_0 .. V_m
  Matrix final_v;
  Matrix final_lambda;  // Ritz block V^H H(V) V of the final iterate
  ScfStatus status = ScfStatus::MaxIter;
  int iterations = 0;  // eigensolves performed (= records.size() - 1)
};

/// Plain (sigma = 0) or level-shifted SCF on H_sigma(V) = H(V) - sigma V V^H.
/// Residuals are always measured on the unshifted problem.
IterationHistory scf_iterate(const NepvProblem& problem, const Subspace& v0,
                             const ScfOptions& opts);

/// Eigen-decomposes H at (a one-step polish of) V and packages the solution.
/// Throws NotASolution when the residual exceeds cert_tol, GapViolation when
/// the eigenvalue gap closes.
SolutionCertificate certify(const NepvProblem& problem, const Subspace& v, double cert_tol);

/// Least-squares geometric rate fitted to log(error) over a trailing window.
/// Uses recorded subspace errors when present, residuals otherwise.  The
/// window ends at the last iterate whose error is >= 1e4 x the smallest
/// recorded error, which keeps the fit clear of the measurement floor.
double observed_rate(const IterationHistory& history, int window);

/// Deterministic default start: the k lowest eigenvectors of the zero-coupling
/// operator for real problems, a seeded random orthonormal basis otherwise.
Subspace default_start(const NepvProblem& problem, std::uint64_t seed);

struct GroundTruth {
  SolutionCertificate cert;
  bool plain_converged = false;
  double sigma_used = 0.0;  // shift of the run that produced the certificate
};

/// The "exact" solution policy: plain SCF to `tol`; if that fails to bring
/// the residual below cert_tol, fall back to the level-shifted SCF at the
/// problem's a-priori shift and re-polish at the bound-optimal shift.
GroundTruth ground_truth(const NepvProblem& problem, double tol, int max_iter,
                         std::uint64_t seed, double cert_tol = 1e-12);

inline Matrix tangent_angle_matrix(const Subspace& v, const SolutionCertificate& cert) {
  return tangent_angle_matrix(v, cert.vstar, cert.vstar_perp);
}

}  // namespace nepv
