// Copyright (c) nepv contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include "nepv/errors.hpp"

namespace nepv {

using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

// Default tolerances for dense double-precision factorizations at n <= 200.
inline constexpr double kTolEig = 1e-12;
inline constexpr double kTolOrth = 1e-12;
inline constexpr double kTolHerm = 1e-10;   // relative Hermitian defect
inline constexpr double kTolRank = 1e-10;   // relative smallest singular value
inline constexpr double kTolGap = 1e-10;    // absolute eigenvalue-gap floor

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues,
/// orthonormal eigenvector columns.
struct HermitianEig {
  Vector eigenvalues;
  Matrix eigenvectors;
};

/// An orthonormal basis of a k-dimensional subspace of C^n.  The constructor
/// enforces ||B^H B - I||_F <= kTolOrth.
class Subspace {
 public:
  explicit Subspace(Matrix basis);

  const Matrix& basis() const { return basis_; }
  Eigen::Index n() const { return basis_.rows(); }
  Eigen::Index k() const { return basis_.cols(); }

 private:
  Matrix basis_;
};

enum class AngleKind { Theta, SinTheta, TanTheta };
enum class NormKind { Spectral, Frobenius };

/// Spectral norm (largest singular value); works for rectangular matrices.
double spectral_norm(const Matrix& a);

HermitianEig hermitian_eig(const Matrix& a);

/// Orthonormal basis with the same range as the full-column-rank M.
Subspace orthonormalize(const Matrix& m);

/// Canonical angles between R(X) and R(Y), ascending.  angles[j] =
/// arccos sigma_j(Y^H X) with the cosines clamped into [0,1].
Vector canonical_angles(const Subspace& x, const Subspace& y);

/// Tangent-angle matrix (Vp^H V)(Vs^H V)^{-1} of V relative to the reference
/// splitting [Vs, Vp]; its singular values are the tangents of the canonical
/// angles between R(V) and R(Vs).
Matrix tangent_angle_matrix(const Subspace& v, const Matrix& vstar, const Matrix& vstar_perp);

double subspace_distance(const Subspace& x, const Subspace& y, AngleKind kind, NormKind norm);

}  // namespace nepv
