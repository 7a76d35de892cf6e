// Copyright (c) nepv contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nepv/analysis.hpp"

using namespace nepv;

namespace {

std::mt19937_64 rng(555);

Matrix random_complex(Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = Complex(normal(rng), normal(rng));
  return m;
}

Matrix random_tangent(const RealLinearMap& op) {
  Matrix z = random_complex(op.rows, op.cols);
  if (op.field == OperatorField::Real) z.imag().setZero();
  return z;
}

double pairing(const Matrix& x, const Matrix& y) {
  return (x.adjoint() * y).trace().real();
}

NepvProblem ks_problem(double alpha, Eigen::Index n = 10, Eigen::Index k = 2) {
  KohnShamParams params;
  params.n = n;
  params.k = k;
  params.alpha = alpha;
  return kohn_sham(params);
}

NepvProblem gpe_problem(double beta, Eigen::Index grid = 10, bool radial = true) {
  GpeParams params;
  params.grid_points = grid;
  params.half_width = 1.0;
  params.omega = 0.85;
  params.beta = beta;
  if (radial) {
    params.potential = [](double x, double y) { return 0.5 * (x * x + y * y); };
  } else {
    params.potential = [](double x, double y) { return 0.5 * (x * x + 100.0 * y * y); };
  }
  return gpe(params);
}

NepvProblem constant_problem(const Vector& eigenvalues, Eigen::Index k) {
  const Eigen::Index n = eigenvalues.size();
  NepvProblem p;
  p.n = n;
  p.k = k;
  p.label = "constant";
  p.real_coefficients = false;
  Matrix h = Matrix::Zero(n, n);
  h.diagonal() = eigenvalues.cast<Complex>();
  p.evaluate = [h](const Matrix&) { return h; };
  p.derivative = [n](const Matrix&, const Matrix&) { return Matrix::Zero(n, n); };
  p.apriori_sigma = 1.0;
  return p;
}

SolutionCertificate constant_certificate(const Vector& eigenvalues, Eigen::Index k) {
  const Eigen::Index n = eigenvalues.size();
  SolutionCertificate cert;
  cert.vstar = Matrix::Identity(n, n).leftCols(k);
  cert.vstar_perp = Matrix::Identity(n, n).rightCols(n - k);
  cert.eigenvalues = eigenvalues;
  cert.delta_star = eigenvalues(k) - eigenvalues(k - 1);
  cert.s_star = eigenvalues(n - 1) - eigenvalues(0);
  cert.residual = 0.0;
  return cert;
}

struct Bundle {
  NepvProblem problem;
  SolutionCertificate cert;
};

Bundle ks_bundle(double alpha) {
  Bundle b{ks_problem(alpha), {}};
  b.cert = ground_truth(b.problem, 1e-14, 5000, 0).cert;
  return b;
}

Bundle gpe_bundle(double beta) {
  Bundle b{gpe_problem(beta), {}};
  b.cert = ground_truth(b.problem, 1e-14, 5000, 0).cert;
  return b;
}

RealLinearMap scaled_identity(double c, Eigen::Index rows, Eigen::Index cols) {
  RealLinearMap op;
  op.rows = rows;
  op.cols = cols;
  op.field = OperatorField::Complex;
  op.act = [c](const Matrix& z) { return Matrix(c * z); };
  return op;
}

}  // namespace

TEST_CASE("gap_matrix evaluates shifted gap reciprocals") {
  Vector lam(4);
  lam << 1, 2, 4, 7;
  const SolutionCertificate cert = constant_certificate(lam, 2);

  const Eigen::ArrayXXd d0 = gap_matrix(cert, 0.0);
  CHECK(d0(0, 0) == doctest::Approx(1.0 / 3));
  CHECK(d0(0, 1) == doctest::Approx(1.0 / 2));
  CHECK(d0(1, 0) == doctest::Approx(1.0 / 6));
  CHECK(d0(1, 1) == doctest::Approx(1.0 / 5));

  const Eigen::ArrayXXd d1 = gap_matrix(cert, 1.0);
  CHECK(d1(0, 0) == doctest::Approx(1.0 / 4));
  CHECK(d1(0, 1) == doctest::Approx(1.0 / 3));
  CHECK(d1(1, 0) == doctest::Approx(1.0 / 7));
  CHECK(d1(1, 1) == doctest::Approx(1.0 / 6));

  try {
    gap_matrix(cert, -cert.delta_star + 1e-12);
    FAIL("expected ShiftOutOfRange");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::ShiftOutOfRange);
  }
}

TEST_CASE("sylvester_solution vanishes at the solution and for constant H") {
  const Bundle b = ks_bundle(0.85);
  CHECK(sylvester_solution(b.problem, b.cert, Subspace(b.cert.vstar), 0.0).norm() < 1e-12);

  const Bundle flat = ks_bundle(0.0);
  const Subspace v = orthonormalize(random_complex(10, 2));
  CHECK(sylvester_solution(flat.problem, flat.cert, v, 0.0).norm() < 1e-12);
}

TEST_CASE("sylvester_solution satisfies the defining equation") {
  const Bundle b = ks_bundle(0.85);
  const Eigen::Index k = b.cert.k();
  const Matrix lam_lo = b.cert.eigenvalues.head(k).cast<Complex>().asDiagonal();
  const Matrix lam_hi = b.cert.eigenvalues.tail(b.cert.n() - k).cast<Complex>().asDiagonal();
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix z = random_complex(8, 2);
    const Subspace v =
        orthonormalize(b.cert.vstar + 0.05 * (b.cert.vstar_perp * (z / z.norm())));
    const Matrix x = sylvester_solution(b.problem, b.cert, v, 0.0);
    const Matrix rhs = b.cert.vstar_perp.adjoint() *
                       (b.problem.evaluate(b.cert.vstar) - b.problem.evaluate(v.basis())) *
                       b.cert.vstar;
    CHECK((lam_hi * x - x * lam_lo - rhs).norm() <= 1e-12 * std::max(x.norm(), 1e-300));
  }
}

TEST_CASE("local_operator vanishes for constant problems") {
  const Bundle flat = ks_bundle(0.0);
  const RealLinearMap op = local_operator(flat.problem, flat.cert, 0.0);
  CHECK(op.act(random_tangent(op)).norm() < 1e-12);
}

TEST_CASE("local_operator agrees with the restricted-derivative identity") {
  const Bundle b = ks_bundle(0.85);
  for (double sigma : {0.0, 0.3, 2.5}) {
    const RealLinearMap op = local_operator(b.problem, b.cert, sigma);
    const RealLinearMap q = restricted_derivative(b.problem, b.cert);
    const Eigen::ArrayXXd d = gap_matrix(b.cert, sigma);
    for (int trial = 0; trial < 5; ++trial) {
      const Matrix z = random_tangent(op);
      const Matrix expected = z - (d * q.act(z).array()).matrix();
      CHECK((op.act(z) - expected).norm() <= 1e-12 * z.norm());
    }
  }
}

TEST_CASE("local_operator spectral radius matches the published digit") {
  const Bundle b = ks_bundle(0.85);
  const double rho = spectral_radius(local_operator(b.problem, b.cert, 0.0));
  CHECK(rho == doctest::Approx(0.9913931591).epsilon(1e-7));
}

TEST_CASE("one SCF step tracks the local operator to first order") {
  const Bundle b = ks_bundle(0.85);
  const RealLinearMap op = local_operator(b.problem, b.cert, 0.0);
  Matrix z0 = random_tangent(op);
  z0 /= z0.norm();

  double previous = 0.0;
  for (int decade = 0; decade < 3; ++decade) {
    const double eps = std::pow(10.0, -2 - decade);
    const Subspace v = orthonormalize(b.cert.vstar + eps * (b.cert.vstar_perp * z0));
    const Matrix h = b.problem.evaluate(v.basis());
    const HermitianEig eig = hermitian_eig(h);
    const Subspace v_next = Subspace(eig.eigenvectors.leftCols(2));
    const Matrix t0 = tangent_angle_matrix(v, b.cert);
    const Matrix t1 = tangent_angle_matrix(v_next, b.cert);
    const double ratio = (t1 - op.act(t0)).norm() / t0.norm();
    if (decade > 0) CHECK(ratio * 5.0 <= previous);
    previous = ratio;
  }
}

TEST_CASE("restricted_derivative of a constant problem is the Sylvester operator") {
  Vector lam(4);
  lam << 1, 2, 4, 7;
  const NepvProblem p = constant_problem(lam, 2);
  const SolutionCertificate cert = constant_certificate(lam, 2);
  const RealLinearMap q = restricted_derivative(p, cert);
  const RealMatrix rep = realify(q);

  // Eigenvalues are the pairwise gaps, each twice (real and imaginary copy).
  Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<RealMatrix>(0.5 * (rep + rep.transpose()))
                            .eigenvalues();
  std::vector<double> expected = {2, 2, 3, 3, 5, 5, 6, 6};
  REQUIRE(eig.size() == 8);
  for (int i = 0; i < 8; ++i) CHECK(eig(i) == doctest::Approx(expected[i]).epsilon(1e-12));

  const QExtremes ext = q_extremes(p, cert);
  CHECK(ext.mu_min == doctest::Approx(2.0));   // = delta*
  CHECK(ext.mu_max == doctest::Approx(6.0));   // = s*
  CHECK(ext.positive_definite);
}

TEST_CASE("restricted_derivative is numerically self-adjoint on the benchmarks") {
  const Bundle b = ks_bundle(1.0);
  const RealLinearMap q = restricted_derivative(b.problem, b.cert);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix z = random_tangent(q);
    const Matrix y = random_tangent(q);
    worst = std::max(worst, std::abs(pairing(y, q.act(z)) - pairing(q.act(y), z)) /
                                (z.norm() * y.norm()));
  }
  CHECK(worst <= 1e-10);

  const QExtremes ext = q_extremes(b.problem, b.cert);
  CHECK(ext.mu_min > 0);
  CHECK(ext.mu_max <= 3.0 * 1.0 * laplacian_inverse_norm(10) + 4.0);
}

TEST_CASE("q_extremes flags operators that are not self-adjoint") {
  Vector lam(4);
  lam << 1, 2, 4, 7;
  NepvProblem p = constant_problem(lam, 2);
  const Eigen::Index n = p.n;
  // Hermitian-valued but pairing-asymmetric: the (perp, occupied) block
  // couples tangent entry (1,1) into (0,0) with no transposed counterpart.
  p.derivative = [n](const Matrix&, const Matrix& x) {
    Matrix h = Matrix::Zero(n, n);
    h(2, 0) = x(3, 1);
    h(0, 2) = std::conj(x(3, 1));
    return h;
  };
  const SolutionCertificate cert = constant_certificate(lam, 2);
  try {
    q_extremes(p, cert);
    FAIL("expected NotSelfAdjoint");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::NotSelfAdjoint);
  }
}

TEST_CASE("realify represents canonical complex operators") {
  const Eigen::Index rows = 3, cols = 2, n = rows * cols;

  RealLinearMap identity = scaled_identity(1.0, rows, cols);
  CHECK((realify(identity) - RealMatrix::Identity(2 * n, 2 * n)).norm() < 1e-14);

  RealLinearMap conjugation = scaled_identity(1.0, rows, cols);
  conjugation.act = [](const Matrix& z) { return Matrix(z.conjugate()); };
  RealMatrix expected = RealMatrix::Zero(2 * n, 2 * n);
  expected.topLeftCorner(n, n).setIdentity();
  expected.bottomRightCorner(n, n) = -RealMatrix::Identity(n, n);
  CHECK((realify(conjugation) - expected).norm() < 1e-14);

  RealLinearMap rotation = scaled_identity(1.0, rows, cols);
  rotation.act = [](const Matrix& z) { return Matrix(Complex(0, 1) * z); };
  RealMatrix rot = RealMatrix::Zero(2 * n, 2 * n);
  rot.topRightCorner(n, n) = -RealMatrix::Identity(n, n);
  rot.bottomLeftCorner(n, n).setIdentity();
  CHECK((realify(rotation) - rot).norm() < 1e-14);

  CHECK(spectral_radius(conjugation) == doctest::Approx(1.0));
  CHECK(spectral_radius(scaled_identity(-0.7, rows, cols)) == doctest::Approx(0.7));
}

TEST_CASE("realify is faithful to the action") {
  const Bundle real_case = ks_bundle(0.85);
  const Bundle complex_case = gpe_bundle(2.0);
  std::normal_distribution<double> normal;
  for (const Bundle* b : {&real_case, &complex_case}) {
    const RealLinearMap op = local_operator(b->problem, b->cert, 0.0);
    const RealMatrix rep = realify(op);
    for (int trial = 0; trial < 100; ++trial) {
      Vector x(rep.cols());
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
      const Vector lhs = rep * x;
      const Vector rhs = m2v(op.act(v2m(x, op.rows, op.cols, op.field)), op.field);
      CHECK((lhs - rhs).norm() <= 1e-12 * x.norm());
    }
  }
}

TEST_CASE("realify enforces the size cap") {
  RealLinearMap huge = scaled_identity(1.0, 30000, 1);
  try {
    realify(huge);
    FAIL("expected TooLarge");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::TooLarge);
  }
}

TEST_CASE("operator_norm_frobenius matches an independent singular value") {
  CHECK(operator_norm_frobenius(scaled_identity(-2.5, 4, 2)) == doctest::Approx(2.5));

  const Eigen::Index p = 5;
  RealMatrix a(p, p);
  std::normal_distribution<double> normal;
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < p; ++i) a(i, j) = normal(rng);

  RealLinearMap op;
  op.rows = p;
  op.cols = 2;
  op.field = OperatorField::Complex;
  op.act = [a](const Matrix& z) { return Matrix(a.cast<Complex>() * z); };

  // Oracle: sigma_max(A) via the eigenvalues of A^T A.
  const double expected = std::sqrt(Eigen::SelfAdjointEigenSolver<RealMatrix>(a.transpose() * a)
                                        .eigenvalues()
                                        .maxCoeff());
  CHECK(operator_norm_frobenius(op) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("adjoint satisfies the pairing identity on both benchmarks") {
  for (const Bundle& b : {ks_bundle(1.0), gpe_bundle(2.0)}) {
    const RealLinearMap op = local_operator(b.problem, b.cert, 0.0);
    const RealLinearMap adj = adjoint(op);
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix z = random_tangent(op);
      const Matrix y = random_tangent(op);
      CHECK(std::abs(pairing(op.act(z), y) - pairing(z, adj.act(y))) <=
            1e-11 * z.norm() * y.norm());
    }
    // Analytic closed form against the transposed representation.
    REQUIRE(op.analytic_adjoint);
    const RealMatrix rep_t = realify(op).transpose();
    for (int trial = 0; trial < 5; ++trial) {
      const Matrix y = random_tangent(op);
      const Matrix via_transpose = v2m(rep_t * m2v(y, op.field), op.rows, op.cols, op.field);
      CHECK((op.analytic_adjoint(y) - via_transpose).norm() <= 1e-11 * y.norm());
    }
  }
}

TEST_CASE("self-adjoint operators equal their adjoint action") {
  const Bundle b = ks_bundle(1.0);
  const RealLinearMap q = restricted_derivative(b.problem, b.cert);
  const RealLinearMap adj = adjoint(q);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix z = random_tangent(q);
    CHECK((q.act(z) - adj.act(z)).norm() <= 1e-10 * z.norm());
  }
}

TEST_CASE("eta_czbl reproduces the published digits") {
  const Bundle flat = ks_bundle(0.0);
  CHECK(eta_czbl(flat.problem, flat.cert) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  const Bundle b = ks_bundle(0.85);
  CHECK(eta_czbl(b.problem, b.cert) == doctest::Approx(1.430511920).epsilon(1e-6));
}

TEST_CASE("eta_m bridges the norm and the spectral radius") {
  const Bundle b = ks_bundle(0.85);
  CHECK(eta_m(b.problem, b.cert, 1, 0.0) ==
        doctest::Approx(operator_norm_frobenius(local_operator(b.problem, b.cert, 0.0)))
            .epsilon(1e-12));
  CHECK(eta_m(b.problem, b.cert, 64, 0.0) == doctest::Approx(0.9913931591).epsilon(5e-3));

  // Constant problem under a shift: L_sigma = -sigma/(gap+sigma) entrywise,
  // a normal operator, so every m-step factor equals the spectral radius.
  Vector lam(4);
  lam << 0, 1, 2, 3;
  NepvProblem p = constant_problem(lam, 2);
  const SolutionCertificate cert = constant_certificate(lam, 2);
  const double sigma = 0.7;
  const double expected = sigma / (cert.delta_star + sigma);
  for (int m : {1, 2, 5}) {
    CHECK(eta_m(p, cert, m, sigma) == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(eta_m(p, cert, 3, 0.0) == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS_AS(eta_m(b.problem, b.cert, 0, 0.0), Error);
}

TEST_CASE("ordering chain rho <= eta_m <= eta_sup <= eta_czbl") {
  for (const Bundle& b : {ks_bundle(0.85), gpe_bundle(3.5)}) {
    for (double sigma : {0.0, 0.36, 5.0}) {
      const RealLinearMap op = local_operator(b.problem, b.cert, sigma);
      const double rho = spectral_radius(op);
      const double eta1 = operator_norm_frobenius(op);
      double previous = eta1;
      for (int m : {2, 4, 8, 16}) {
        const double em = eta_m(b.problem, b.cert, m, sigma);
        CHECK(em <= previous + 1e-10);
        CHECK(rho <= em + 1e-10);
        previous = em;
      }
      if (sigma == 0.0) CHECK(eta1 <= eta_czbl(b.problem, b.cert) + 1e-10);
    }
  }
}

TEST_CASE("rho_sigma_bound endpoints and domination") {
  CHECK(rho_sigma_bound(3.0, 3.0, 2.0, 2.0, 1.0) == doctest::Approx(0.0).scale(1.0));
  const double near_one = rho_sigma_bound(0.5, 4.0, 0.4, 4.0, 1e6);
  CHECK(near_one < 1.0);
  CHECK(near_one > 0.999);
  CHECK_THROWS_AS(rho_sigma_bound(0.0, 1.0, 0.5, 1.0, 1.0), Error);
  CHECK_THROWS_AS(rho_sigma_bound(0.5, 1.0, 0.5, 1.0, -0.6), Error);

  const Bundle b = ks_bundle(1.0);
  const QExtremes q = q_extremes(b.problem, b.cert);
  for (int i = 0; i < 50; ++i) {
    const double sigma = -b.cert.delta_star + 0.01 +
                         (30.0 + b.cert.delta_star) * static_cast<double>(i) / 49.0;
    const double rho = spectral_radius(local_operator(b.problem, b.cert, sigma));
    const double bound =
        rho_sigma_bound(q.mu_min, q.mu_max, b.cert.delta_star, b.cert.s_star, sigma);
    CHECK(rho <= bound + 1e-10);
  }
}

TEST_CASE("shift selection formulas") {
  CHECK(sigma_lower_bound(2.0 * 0.7, 0.7) == doctest::Approx(0.0).scale(1.0));

  const double expected = 1.5 / (2.0 * (1.0 - std::cos(std::acos(-1.0) / 11.0))) + 2.0;
  CHECK(apriori_sigma_ks(1.0, 10) == doctest::Approx(expected).epsilon(1e-12));

  const Bundle b = ks_bundle(1.0);
  const double rho_apriori =
      spectral_radius(local_operator(b.problem, b.cert, apriori_sigma_ks(1.0, 10)));
  CHECK(rho_apriori < 1.0);

  // GPE a-priori shift is half of 3*beta + ||A_f||_2.
  GpeParams params;
  params.grid_points = 6;
  params.half_width = 1.0;
  params.omega = 0.85;
  params.beta = 2.0;
  params.potential = [](double x, double y) { return 0.5 * (x * x + y * y); };
  const Matrix a_f = gpe_linear_part(params);
  const HermitianEig eig = hermitian_eig(a_f);
  const double norm2 =
      std::max(std::abs(eig.eigenvalues(0)), std::abs(eig.eigenvalues(eig.eigenvalues.size() - 1)));
  CHECK(apriori_sigma_gpe(2.0, a_f) == doctest::Approx(0.5 * (6.0 + norm2)).epsilon(1e-12));
}

TEST_CASE("optimal_sigma solves the branch-equality equation") {
  CHECK(optimal_sigma(3.0, 3.0, 1.0, 1.0) == doctest::Approx(2.0).epsilon(1e-12));

  const Bundle b = ks_bundle(1.0);
  const QExtremes q = q_extremes(b.problem, b.cert);
  const double sigma = optimal_sigma(q.mu_min, q.mu_max, b.cert.delta_star, b.cert.s_star);
  const double lhs = q.mu_max / (sigma + b.cert.delta_star) - 1.0;
  const double rhs = 1.0 - q.mu_min / (sigma + b.cert.s_star);
  CHECK(std::abs(lhs - rhs) <= 1e-10);

  // Grid-minimization oracle for the bound.
  const double best = rho_sigma_bound(q.mu_min, q.mu_max, b.cert.delta_star, b.cert.s_star, sigma);
  for (int i = 0; i < 100; ++i) {
    const double s = -b.cert.delta_star + 0.02 + 0.4 * i;
    CHECK(best <= rho_sigma_bound(q.mu_min, q.mu_max, b.cert.delta_star, b.cert.s_star, s) + 1e-12);
  }
  CHECK_THROWS_AS(optimal_sigma(-1.0, 2.0, 0.5, 1.0), Error);
}

TEST_CASE("GPE beta=5 shift landscape bottoms out near 0.08") {
  const NepvProblem p = gpe_problem(5.0);
  const GroundTruth truth = ground_truth(p, 1e-13, 5000, 0);
  CHECK_FALSE(truth.plain_converged);  // plain SCF diverges at beta=5
  double best = 1e300, best_sigma = 0;
  for (double sigma = 0.02; sigma <= 0.30; sigma += 0.01) {
    const double rho = spectral_radius(local_operator(p, truth.cert, sigma));
    if (rho < best) {
      best = rho;
      best_sigma = sigma;
    }
  }
  CHECK(best < 1.0);
  CHECK(best_sigma > 0.04);
  CHECK(best_sigma < 0.14);
}

TEST_CASE("compute_rates assembles a consistent report") {
  const NepvProblem p = ks_problem(0.5);
  RateOptions opts;
  const RateReport report = compute_rates(p, 0.0, opts);
  CHECK(report.plain_converged);
  CHECK(report.sigma_used_for_truth == 0.0);
  CHECK(report.eta_sup_infty <= report.eta_sup + 1e-10);
  CHECK(report.eta_sup <= report.eta_czbl + 1e-10);
  REQUIRE(report.observed.has_value());
  CHECK(*report.observed == doctest::Approx(report.eta_sup_infty).epsilon(5e-3));
  CHECK(report.mu_min > 0);
  CHECK(std::isfinite(report.rho_bound));
}
