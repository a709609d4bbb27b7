#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <random>

#include "sssvd/filter.hpp"
#include "sssvd/moments.hpp"
#include "sssvd/problem.hpp"

using namespace sssvd;
using Complex = std::complex<double>;

namespace {

Matrix<double> random_matrix(Index rows, Index cols, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Matrix<double> a(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) a(i, j) = dist(gen);
  return a;
}

Matrix<double> orthonormal(Index rows, Index cols, unsigned seed) {
  Eigen::HouseholderQR<Matrix<double>> qr(random_matrix(rows, cols, seed));
  return qr.householderQ() * Matrix<double>::Identity(rows, cols);
}

Matrix<double> orthonormal_from(const Matrix<double>& x) {
  Eigen::HouseholderQR<Matrix<double>> qr(x);
  return qr.householderQ() * Matrix<double>::Identity(x.rows(), x.cols());
}

// largest sine of the principal angles between the column spans; the
// projector-defect form stays accurate for tiny angles
double max_span_angle_sin(const Matrix<double>& x, const Matrix<double>& y) {
  const Matrix<double> qx = orthonormal_from(x), qy = orthonormal_from(y);
  const Matrix<double> defect = qx - qy * (qy.transpose() * qx);
  Eigen::JacobiSVD<Matrix<double>> svd(defect);
  return svd.singularValues()(0);
}

}  // namespace

TEST_CASE("random_start determinism and genericity") {
  const auto v1 = random_start<double>(200, 20, 3141);
  const auto v2 = random_start<double>(200, 20, 3141);
  CHECK((v1 - v2).norm() == 0.0);
  const auto v3 = random_start<double>(200, 20, 3142);
  CHECK((v1 - v3).norm() > 0.0);
  CHECK(v1.cwiseAbs().maxCoeff() <= 1.0);
  Eigen::JacobiSVD<Matrix<double>> svd(v1);
  CHECK(svd.singularValues().minCoeff() > 0.0);  // full column rank
  CHECK_THROWS_AS(random_start<double>(10, 20, 1), std::invalid_argument);
}

TEST_CASE("refinement is a fixed map on an invariant starting block") {
  // S0 spanning exact in-interval right singular vectors: F S0 keeps the
  // span for any aspect, since the span is f-invariant
  const Index n = 40;
  const auto u = orthonormal(60, n, 21);
  const auto v = orthonormal(n, n, 22);
  Vector<double> sigma(n);
  for (Index i = 0; i < n; ++i) sigma(i) = 0.3 + 0.05 * double(i);  // 0.3 .. 2.25
  const Matrix<double> a = u * sigma.asDiagonal() * v.transpose();
  const auto rule = build_contour(0.8, 1.2, Index(32), 0.1, SpectralTransform<double>::identity());
  const DenseShiftedSolver<double> backend(form_gram(ProblemMatrix<double>::from_dense(a)));

  std::vector<Index> inside;
  for (Index i = 0; i < n; ++i)
    if (sigma(i) >= 0.8 && sigma(i) <= 1.2) inside.push_back(i);
  REQUIRE(inside.size() >= 3);
  Matrix<double> v_sel(n, Index(inside.size()));
  for (size_t k = 0; k < inside.size(); ++k) v_sel.col(Index(k)) = v.col(inside[k]);

  const auto refined = refine_s0(backend, rule, v_sel, 1);
  CHECK(max_span_angle_sin(refined, v_sel) <= 1e-8);
}

TEST_CASE("refinement is span-invariant when the filter is flat (circle, inner spectrum)") {
  // on a circle the N-point filter equals 1/(1 - xi^N), constant to ~2^-32
  // across spectra confined to the inner half of the disk
  const Index n = 30;
  const auto u = orthonormal(50, n, 31);
  const auto v = orthonormal(n, n, 32);
  Vector<double> sigma(n);
  for (Index i = 0; i < n; ++i) sigma(i) = 0.95 + 0.1 * double(i) / double(n - 1);  // inner band
  const Matrix<double> a = u * sigma.asDiagonal() * v.transpose();
  const auto rule = build_contour(0.8, 1.2, Index(32), 1.0, SpectralTransform<double>::identity());
  const DenseShiftedSolver<double> backend(form_gram(ProblemMatrix<double>::from_dense(a)));

  const auto s0 = random_start<double>(n, 8, 5);
  const auto r1 = refine_s0(backend, rule, s0, 1);
  const auto r2 = refine_s0(backend, rule, r1, 1);
  CHECK(max_span_angle_sin(r1, r2) <= 1e-8);
}

TEST_CASE("refinement annihilates a spectrum far outside the interval") {
  const Index n = 30;
  const auto u = orthonormal(50, n, 41);
  const auto v = orthonormal(n, n, 42);
  Vector<double> sigma(n);
  for (Index i = 0; i < n; ++i) sigma(i) = 5.0 + 0.03 * double(i);
  const Matrix<double> a = u * sigma.asDiagonal() * v.transpose();
  const auto rule = build_contour(0.8, 1.2, Index(32), 0.1, SpectralTransform<double>::identity());
  const DenseShiftedSolver<double> backend(form_gram(ProblemMatrix<double>::from_dense(a)));
  const auto s0 = random_start<double>(n, 8, 6);
  const auto refined = refine_s0(backend, rule, s0, 1);
  CHECK(refined.norm() / s0.norm() <= 1e-6);
}

TEST_CASE("moment identity S_k = G^k S_0 for the identity transform") {
  const Index n = 40;
  const auto u = orthonormal(80, n, 51);
  const auto v = orthonormal(n, n, 52);
  Vector<double> sigma(n);
  for (Index i = 0; i < n; ++i) sigma(i) = 0.2 + 0.04 * double(i);
  const Matrix<double> a = u * sigma.asDiagonal() * v.transpose();
  const Matrix<double> gram = form_gram(ProblemMatrix<double>::from_dense(a));
  const DenseShiftedSolver<double> backend(gram);
  const auto rule = build_contour(0.8, 1.2, Index(32), 0.1, SpectralTransform<double>::identity());
  const auto s0 = random_start<double>(n, 10, 7);
  const auto blocks = build_moments(backend, rule, s0, Index(4), 1);
  REQUIRE(blocks.blocks.size() == 5);  // one extra block beyond M-1
  Matrix<double> power = blocks.blocks[0];
  for (Index k = 1; k <= 4; ++k) {
    power = (gram * power).eval();
    CAPTURE(k);
    CHECK((blocks.blocks[k] - power).norm() / power.norm() <= 1e-8);
  }
  // consequence used by the residual estimate
  const Matrix<double> splus = blocks.stacked_plus();
  const Matrix<double> gs = gram * blocks.stacked();
  CHECK((splus - gs).norm() / gs.norm() <= 1e-8);
}

TEST_CASE("exp transform approximates powers of log(G)") {
  const Index n = 40;
  const auto u = orthonormal(80, n, 61);
  const auto v = orthonormal(n, n, 62);
  Vector<double> sigma(n);
  for (Index i = 0; i < n; ++i) sigma(i) = std::pow(10.0, -6.0 + 6.0 * double(i) / double(n - 1));
  const Matrix<double> a = u * sigma.asDiagonal() * v.transpose();
  const Matrix<double> gram = form_gram(ProblemMatrix<double>::from_dense(a));
  const DenseShiftedSolver<double> backend(gram);
  const auto rule =
      build_contour(1e-4, 1e-1, Index(32), 0.1, SpectralTransform<double>::exponential());
  const auto s0 = random_start<double>(n, 10, 8);
  const auto blocks = build_moments(backend, rule, s0, Index(2), 1);

  // oracle: log(G) through an eigendecomposition of the exact spectrum
  const Eigen::SelfAdjointEigenSolver<Matrix<double>> eig(gram);
  Vector<double> loglam = eig.eigenvalues();
  for (Index i = 0; i < n; ++i) loglam(i) = std::log(std::max(loglam(i), 1e-300));
  const Matrix<double> logg =
      eig.eigenvectors() * loglam.asDiagonal() * eig.eigenvectors().transpose();
  const Matrix<double> expected = logg * blocks.blocks[0];
  CHECK((blocks.blocks[1] - expected).norm() / expected.norm() <= 1e-4);
}

TEST_CASE("M=1 stacks reduce to single blocks") {
  const Matrix<double> a = random_matrix(30, 12, 71);
  const Matrix<double> gram = form_gram(ProblemMatrix<double>::from_dense(a));
  const DenseShiftedSolver<double> backend(gram);
  const auto rule = build_contour(0.5, 2.0, Index(16), 0.1, SpectralTransform<double>::identity());
  const auto s0 = random_start<double>(12, 4, 9);
  const auto blocks = build_moments(backend, rule, s0, Index(1), 1);
  CHECK((blocks.stacked() - blocks.blocks[0]).norm() == 0.0);
  CHECK((blocks.stacked_plus() - blocks.blocks[1]).norm() == 0.0);
}

TEST_CASE("half-rule reduction reproduces the explicit full-rule sum") {
  // spectrum inside the interval, so the blocks carry O(1) signal and a
  // relative comparison is meaningful
  const auto u = orthonormal(50, 20, 81);
  const auto v = orthonormal(20, 20, 82);
  Vector<double> sigma(20);
  for (Index i = 0; i < 20; ++i) sigma(i) = 0.7 + 0.06 * double(i);
  const Matrix<double> a = u * sigma.asDiagonal() * v.transpose();
  const Matrix<double> gram = form_gram(ProblemMatrix<double>::from_dense(a));
  const DenseShiftedSolver<double> backend(gram);
  const auto rule = build_contour(0.5, 2.0, Index(16), 0.1, SpectralTransform<double>::identity());
  const auto s0 = random_start<double>(20, 6, 10);
  const auto blocks = build_moments(backend, rule, s0, Index(2), 1);

  // full rule, complex accumulation over all N nodes
  for (Index k = 0; k <= 2; ++k) {
    ComplexMatrix<double> full = ComplexMatrix<double>::Zero(20, 6);
    for (Index j = 0; j < rule.count(); ++j) {
      const auto fact = backend.factor(rule.shift(j));
      Complex power(1);
      for (Index kk = 0; kk < k; ++kk) power *= rule.nodes()[j];
      full += rule.weights()[j] * power * fact.solve(s0.cast<Complex>());
    }
    CAPTURE(k);
    CHECK(full.imag().cwiseAbs().maxCoeff() <= 1e-13 * full.real().norm());
    CHECK((blocks.blocks[k] - full.real()).norm() <= 1e-13 * full.real().norm());
  }
}

TEST_CASE("worker count does not change the result") {
  const Matrix<double> a = random_matrix(40, 16, 91);
  const Matrix<double> gram = form_gram(ProblemMatrix<double>::from_dense(a));
  const DenseShiftedSolver<double> backend(gram);
  const auto rule = build_contour(0.5, 2.0, Index(32), 0.1, SpectralTransform<double>::identity());
  const auto s0 = random_start<double>(16, 5, 11);
  const auto serial = build_moments(backend, rule, s0, Index(3), 1);
  const auto parallel = build_moments(backend, rule, s0, Index(3), 4);
  for (size_t k = 0; k < serial.blocks.size(); ++k)
    CHECK((serial.blocks[k] - parallel.blocks[k]).norm() == 0.0);
}

TEST_CASE("rank-1 operator: moment block norm equals the filter gain") {
  const Index m = 50, n = 20;
  Vector<double> uvec = random_matrix(m, 1, 101);
  uvec /= uvec.norm();
  Vector<double> vvec = random_matrix(n, 1, 102);
  vvec /= vvec.norm();
  const double s = 1.03;
  const Matrix<double> a = s * uvec * vvec.transpose();
  const auto rule = build_contour(0.8, 1.2, Index(32), 0.1, SpectralTransform<double>::identity());
  const DenseShiftedSolver<double> backend(form_gram(ProblemMatrix<double>::from_dense(a)));
  const auto v_in = random_start<double>(n, 6, 12);
  const auto blocks = build_moments(backend, rule, v_in, Index(1), 1);
  const double gain = blocks.blocks[0].norm() / (vvec.transpose() * v_in).norm();
  CHECK(gain == doctest::Approx(std::abs(eval_filter(rule, s))).epsilon(1e-10));
}

TEST_CASE("low-rank threshold semantics") {
  // orthonormal columns: all singular values 1, everything retained
  const auto q = orthonormal(30, 8, 111);
  const auto basis = low_rank<double>(q, 1e-12);
  CHECK(basis.rank() == 8);
  CHECK((basis.singular_values.array() - 1.0).abs().maxCoeff() <= 1e-12);
  CHECK((basis.left.transpose() * basis.left - Matrix<double>::Identity(8, 8)).norm() <= 1e-12);

  // duplicated column: exact rank deficiency collapses to r=1
  Matrix<double> dup(20, 2);
  dup.col(0) = random_matrix(20, 1, 112);
  dup.col(1) = dup.col(0);
  CHECK(low_rank<double>(dup, 1e-12).rank() == 1);

  // reconstruction within the discarded tail
  const Matrix<double> s = random_matrix(25, 10, 113);
  const auto b2 = low_rank<double>(s, 0.5);
  Eigen::JacobiSVD<Matrix<double>> ref(s);
  const double tail = b2.rank() < 10 ? ref.singularValues()(b2.rank()) : 0.0;
  const Matrix<double> approx =
      b2.left * b2.singular_values.asDiagonal() * b2.right.transpose();
  Eigen::JacobiSVD<Matrix<double>> err(s - approx);
  CHECK(err.singularValues()(0) <= tail * (1 + 1e-12) + 1e-14);

  CHECK_THROWS_AS(low_rank<double>(Matrix<double>::Zero(10, 4), 1e-12), EmptySubspaceError);
}

TEST_CASE("parameter validation") {
  SsParams<double> p;
  CHECK_NOTHROW(p.validate(200));
  CHECK_THROWS_AS(p.validate(50), std::invalid_argument);  // L*M > n
  p.lowrank_threshold = 0.0;
  CHECK_THROWS_AS(p.validate(200), std::invalid_argument);
  p = {};
  p.quadrature_count = 31;
  CHECK_THROWS_AS(p.validate(200), std::invalid_argument);
}
