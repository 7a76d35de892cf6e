// Copyright (c) nepv contributors
// SPDX-License-Identifier: Apache-2.0

#include "nepv/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace nepv {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::BackendFailure: return "BackendFailure";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularOverlap: return "SingularOverlap";
    case ErrorCode::AngleAtPiOverTwo: return "AngleAtPiOverTwo";
    case ErrorCode::ShiftOutOfRange: return "ShiftOutOfRange";
    case ErrorCode::GapCollapse: return "GapCollapse";
    case ErrorCode::NotASolution: return "NotASolution";
    case ErrorCode::GapViolation: return "GapViolation";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NotSelfAdjoint: return "NotSelfAdjoint";
    case ErrorCode::InvalidSpectrum: return "InvalidSpectrum";
    case ErrorCode::NoRootInRange: return "NoRootInRange";
    case ErrorCode::CertificationFailed: return "CertificationFailed";
  }
  return "Unknown";
}

Subspace::Subspace(Matrix basis) : basis_(std::move(basis)) {
  if (basis_.rows() < basis_.cols() || basis_.cols() < 1) {
    throw Error(ErrorCode::InvalidParams, "subspace basis must be tall n x k, k >= 1");
  }
  const Eigen::Index k = basis_.cols();
  const double defect = (basis_.adjoint() * basis_ - Matrix::Identity(k, k)).norm();
  if (defect > kTolOrth * std::sqrt(static_cast<double>(k))) {
    throw Error(ErrorCode::InvalidParams, "basis is not orthonormal, defect " +
                                              std::to_string(defect));
  }
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

HermitianEig hermitian_eig(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "hermitian_eig expects a square matrix");
  }
  const double scale = a.norm();
  const double defect = (a - a.adjoint()).norm();
  if (defect > kTolHerm * std::max(scale, 1e-300)) {
    throw Error(ErrorCode::NotHermitian, "Hermitian defect " + std::to_string(defect));
  }
  const Matrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::BackendFailure, "eigendecomposition did not converge");
  }
  return HermitianEig{es.eigenvalues(), es.eigenvectors()};
}

Subspace orthonormalize(const Matrix& m) {
  if (m.rows() < m.cols() || m.cols() < 1) {
    throw Error(ErrorCode::InvalidParams, "orthonormalize expects a tall n x k matrix");
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= kTolRank * sv(0)) {
    throw Error(ErrorCode::RankDeficient, "smallest singular value " +
                                              std::to_string(sv(sv.size() - 1)));
  }
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  const Matrix r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  // Fix column phases so that R has a positive real diagonal; keeps
  // already-orthonormal inputs bit-stable.
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= std::conj(d) / std::abs(d);
  }
  return Subspace(std::move(q));
}

Vector canonical_angles(const Subspace& x, const Subspace& y) {
  if (x.n() != y.n() || x.k() != y.k()) {
    throw Error(ErrorCode::DimensionMismatch, "subspaces must share dimensions");
  }
  Eigen::JacobiSVD<Matrix> svd(y.basis().adjoint() * x.basis());
  Vector angles(x.k());
  for (Eigen::Index j = 0; j < x.k(); ++j) {
    angles(j) = std::acos(std::clamp(svd.singularValues()(j), 0.0, 1.0));
  }
  return angles;  // singular values descending => angles ascending
}

Matrix tangent_angle_matrix(const Subspace& v, const Matrix& vstar, const Matrix& vstar_perp) {
  if (v.n() != vstar.rows() || v.k() != vstar.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "iterate and reference dimensions differ");
  }
  const Matrix overlap = vstar.adjoint() * v.basis();
  Eigen::JacobiSVD<Matrix> svd(overlap, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= kTolRank) {
    throw Error(ErrorCode::SingularOverlap, "V*^H V numerically singular");
  }
  return (vstar_perp.adjoint() * v.basis()) * svd.solve(Matrix::Identity(v.k(), v.k()));
}

double subspace_distance(const Subspace& x, const Subspace& y, AngleKind kind, NormKind norm) {
  Vector angles = canonical_angles(x, y);
  Vector values(angles.size());
  for (Eigen::Index j = 0; j < angles.size(); ++j) {
    switch (kind) {
      case AngleKind::Theta: values(j) = angles(j); break;
      case AngleKind::SinTheta: values(j) = std::sin(angles(j)); break;
      case AngleKind::TanTheta:
        if (std::cos(angles(j)) <= kTolRank) {
          throw Error(ErrorCode::AngleAtPiOverTwo, "tangent undefined at pi/2");
        }
        values(j) = std::tan(angles(j));
        break;
    }
  }
  return norm == NormKind::Spectral ? values.lpNorm<Eigen::Infinity>() : values.norm();
}

}  // namespace nepv
