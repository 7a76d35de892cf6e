// Copyright (c) nepv contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>

#include "nepv/linalg.hpp"

namespace nepv {

/// A nonlinear eigenvector problem H(V)V = V*Lambda with right-unitarily
/// invariant, Hermitian-valued H.  `evaluate` accepts arbitrary (not
/// necessarily orthonormal) V so that finite-difference probing works.
///
/// `local_adjoint`, when set, is the closed-form adjoint of the plain-SCF
/// local operator: (Vs, Vp, D, Y) -> L*(Y) where D is the eigenvalue-gap
/// reciprocal matrix at the solution.
struct NepvProblem {
  Eigen::Index n = 0;
  Eigen::Index k = 0;
  std::string label;
  bool real_coefficients = false;  // solution/operators live over R
  bool has_analytic_adjoint = false;
  double apriori_sigma = 0.0;  // closed-form locally convergent shift

  std::function<Matrix(const Matrix&)> evaluate;
  std::function<Matrix(const Matrix&, const Matrix&)> derivative;  // (V, X) -> DH(V)[X]
  std::function<Matrix(const Matrix& vs, const Matrix& vp, const Eigen::ArrayXXd& d,
                       const Matrix& y)>
      local_adjoint;
};

/// 1D Kohn-Sham model: H(V) = L + alpha * Diag(L^{-1} diag(V V^H)) with
/// L = tridiag(-1, 2, -1).
struct KohnShamParams {
  Eigen::Index n = 10;
  Eigen::Index k = 2;
  double alpha = 0.0;
};

/// 2D Gross-Pitaevskii model on [-ell, ell]^2 with N interior points per
/// axis: H(V) = A_f + beta * Diag(|V|^2), n = N^2, k = 1.
struct GpeParams {
  Eigen::Index grid_points = 10;  // N
  double half_width = 1.0;        // ell
  double omega = 0.0;             // rotation speed
  double beta = 0.0;              // coupling
  std::function<double(double, double)> potential;
};

NepvProblem kohn_sham(const KohnShamParams& params);
NepvProblem gpe(const GpeParams& params);

/// Central-difference derivative oracle (H(V+hX) - H(V-hX)) / (2h).
Matrix fd_derivative(const NepvProblem& problem, const Matrix& v, const Matrix& x, double h);

/// Closed form ||L^{-1}||_2 = (2(1 - cos(pi/(n+1))))^{-1} for the 1D Laplacian.
double laplacian_inverse_norm(Eigen::Index n);

/// The discretized rotation-frame operator A_f of the GPE model (exposed for
/// shift bounds and tests).
Matrix gpe_linear_part(const GpeParams& params);

}  // namespace nepv
