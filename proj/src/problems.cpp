// Copyright (c) nepv contributors
// SPDX-License-Identifier: Apache-2.0

#include "nepv/problems.hpp"

#include <cmath>
#include <memory>
#include <numbers>

#include "nepv/analysis.hpp"

namespace nepv {

namespace {

RealMatrix tridiag(Eigen::Index n, double lower, double diag, double upper) {
  RealMatrix t = RealMatrix::Zero(n, n);
  t.diagonal().setConstant(diag);
  t.diagonal(1).setConstant(upper);
  t.diagonal(-1).setConstant(lower);
  return t;
}

RealMatrix kron(const RealMatrix& a, const RealMatrix& b) {
  RealMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

double laplacian_inverse_norm(Eigen::Index n) {
  return 1.0 / (2.0 * (1.0 - std::cos(std::numbers::pi / static_cast<double>(n + 1))));
}

NepvProblem kohn_sham(const KohnShamParams& params) {
  if (params.n < 2 || params.k < 1 || params.k >= params.n || params.alpha < 0) {
    throw Error(ErrorCode::InvalidParams, "kohn_sham requires n >= 2, 1 <= k < n, alpha >= 0");
  }
  const Eigen::Index n = params.n;
  const double alpha = params.alpha;
  auto laplacian = std::make_shared<RealMatrix>(tridiag(n, -1.0, 2.0, -1.0));
  auto laplacian_inv = std::make_shared<RealMatrix>(laplacian->inverse());

  NepvProblem p;
  p.n = n;
  p.k = params.k;
  p.label = "ks(n=" + std::to_string(n) + ",k=" + std::to_string(params.k) +
            ",alpha=" + std::to_string(alpha) + ")";
  p.real_coefficients = true;
  p.has_analytic_adjoint = true;
  p.apriori_sigma = apriori_sigma_ks(alpha, n);

  p.evaluate = [n, alpha, laplacian, laplacian_inv](const Matrix& v) {
    if (v.rows() != n) throw Error(ErrorCode::DimensionMismatch, "V has wrong row count");
    const Vector rho = v.cwiseAbs2().rowwise().sum();
    Matrix h = laplacian->cast<Complex>();
    h.diagonal() += (alpha * (*laplacian_inv * rho)).cast<Complex>();
    return h;
  };
  p.derivative = [n, alpha, laplacian_inv](const Matrix& v, const Matrix& x) {
    if (v.rows() != n || x.rows() != n || v.cols() != x.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "derivative direction dimensions");
    }
    const Vector d = (x.array() * v.array().conjugate()).real().rowwise().sum();
    Matrix out = Matrix::Zero(n, n);
    out.diagonal() = (2.0 * alpha * (*laplacian_inv * d)).cast<Complex>();
    return out;
  };
  p.local_adjoint = [alpha, laplacian_inv](const Matrix& vs, const Matrix& vp,
                                           const Eigen::ArrayXXd& d, const Matrix& y) {
    const Matrix inner = vp * (d * y.array()).matrix() * vs.adjoint();
    const Vector diag = inner.diagonal().real();
    Matrix scaled = Matrix::Zero(vs.rows(), vs.rows());
    scaled.diagonal() = (laplacian_inv->transpose() * diag).cast<Complex>();
    return Matrix(-2.0 * alpha * (vp.adjoint() * scaled * vs));
  };
  return p;
}

Matrix gpe_linear_part(const GpeParams& params) {
  if (params.grid_points < 2 || params.half_width <= 0 || params.beta < 0 ||
      !params.potential) {
    throw Error(ErrorCode::InvalidParams,
                "gpe requires N >= 2, ell > 0, beta >= 0 and a potential");
  }
  const Eigen::Index grid = params.grid_points;
  const double h = 2.0 * params.half_width / static_cast<double>(grid + 1);
  Vector pts(grid);
  for (Eigen::Index i = 0; i < grid; ++i) {
    pts(i) = -params.half_width + static_cast<double>(i + 1) * h;
  }

  // Samples ordered with x fastest: f(x_1,y_1), ..., f(x_N,y_1), f(x_1,y_2), ...
  const Eigen::Index n = grid * grid;
  Vector ftil(n);
  for (Eigen::Index jy = 0; jy < grid; ++jy)
    for (Eigen::Index ix = 0; ix < grid; ++ix)
      ftil(jy * grid + ix) = h * h * params.potential(pts(ix), pts(jy));

  const RealMatrix d2 = tridiag(grid, 1.0, -2.0, 1.0);
  const RealMatrix dn = tridiag(grid, -0.5, 0.0, 0.5);
  const RealMatrix eye = RealMatrix::Identity(grid, grid);
  const RealMatrix m = kron(d2, eye) + kron(eye, d2);
  const RealMatrix mphi =
      kron(RealMatrix((h * pts).asDiagonal()), dn) - kron(dn, RealMatrix((h * pts).asDiagonal()));

  Matrix a_f = (-0.5 * m).cast<Complex>();
  a_f.diagonal() += ftil.cast<Complex>();
  a_f += Complex(0.0, -params.omega) * mphi.cast<Complex>();
  return a_f;
}

NepvProblem gpe(const GpeParams& params) {
  auto a_f = std::make_shared<Matrix>(gpe_linear_part(params));
  const Eigen::Index n = a_f->rows();
  const double beta = params.beta;

  NepvProblem p;
  p.n = n;
  p.k = 1;
  p.label = "gpe(N=" + std::to_string(params.grid_points) +
            ",omega=" + std::to_string(params.omega) + ",beta=" + std::to_string(beta) + ")";
  p.real_coefficients = false;
  p.has_analytic_adjoint = true;
  p.apriori_sigma = apriori_sigma_gpe(beta, *a_f);

  p.evaluate = [n, beta, a_f](const Matrix& v) {
    if (v.rows() != n || v.cols() != 1) {
      throw Error(ErrorCode::DimensionMismatch, "GPE expects an n x 1 state");
    }
    Matrix h = *a_f;
    h.diagonal() += (beta * v.col(0).cwiseAbs2()).cast<Complex>();
    return h;
  };
  p.derivative = [n, beta](const Matrix& v, const Matrix& x) {
    if (v.rows() != n || x.rows() != n || v.cols() != 1 || x.cols() != 1) {
      throw Error(ErrorCode::DimensionMismatch, "derivative direction dimensions");
    }
    Matrix out = Matrix::Zero(n, n);
    out.diagonal() =
        (2.0 * beta * (v.col(0).conjugate().array() * x.col(0).array()).real()).cast<Complex>();
    return out;
  };
  p.local_adjoint = [beta](const Matrix& vs, const Matrix& vp, const Eigen::ArrayXXd& d,
                           const Matrix& y) {
    const Matrix inner = vp * (d * y.array()).matrix() * vs.adjoint();
    const Vector re_diag = inner.diagonal().real();
    const Matrix weighted = re_diag.cast<Complex>().asDiagonal() * vs;
    return Matrix(-2.0 * beta * (vp.adjoint() * weighted));
  };
  return p;
}

Matrix fd_derivative(const NepvProblem& problem, const Matrix& v, const Matrix& x, double h) {
  if (h <= 0) throw Error(ErrorCode::InvalidParams, "fd step must be positive");
  return (problem.evaluate(v + h * x) - problem.evaluate(v - h * x)) / (2.0 * h);
}

}  // namespace nepv
