#include <doctest.h>

#include <cmath>
#include <random>

#include "sketchreg/errors.hpp"
#include "sketchreg/estimator.hpp"
#include "sketchreg/filters.hpp"
#include "sketchreg/kernels.hpp"
#include "sketchreg/linalg.hpp"
#include "sketchreg/sketch.hpp"

using namespace sketchreg;

namespace {

Matrix random_matrix(Index r, Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix A(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) A(i, j) = normal(rng);
  return A;
}

// Modified Gram-Schmidt with a drop tolerance; independent of the whitening
// path inside the library.
Matrix mgs_orthonormalize(const Matrix& B, double tol = 1e-10) {
  Matrix Q(B.rows(), B.cols());
  Index r = 0;
  const double scale = std::max(B.cwiseAbs().maxCoeff(), 1.0);
  for (Index j = 0; j < B.cols(); ++j) {
    Vector v = B.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (Index k = 0; k < r; ++k) v -= Q.col(k).dot(v) * Q.col(k);
    if (v.norm() > tol * scale) {
      Q.col(r) = v / v.norm();
      ++r;
    }
  }
  return Q.leftCols(r);
}

// Direct feature-space evaluation of the projected spectral-filter estimator
// for the linear kernel: omega = P g_lambda(P T_x P) P (X^T y / n).
Vector feature_space_oracle(const Matrix& X, const Vector& y,
                            const SketchOperator& G, const FilterSpec& filter,
                            double lambda) {
  const Index n = X.rows();
  Matrix T = X.transpose() * X / static_cast<double>(n);
  T = 0.5 * (T + T.transpose().eval());
  Matrix Q = mgs_orthonormalize(X.transpose() * G.dense().transpose());
  Matrix P = Q * Q.transpose();
  Matrix PTP = P * T * P;
  PTP = 0.5 * (PTP + PTP.transpose().eval());
  auto eig = linalg::sym_eig(PTP);
  Vector g = apply_filter(filter, eig.eigenvalues.cwiseMax(0.0), lambda);
  Matrix gPTP = eig.eigenvectors * g.asDiagonal() * eig.eigenvectors.transpose();
  Vector b = X.transpose() * y / static_cast<double>(n);
  return P * (gPTP * (P * b));
}

struct Instance {
  Matrix X;
  Vector y;
  Matrix K;
};

Instance random_instance(Index n, Index d, std::uint64_t seed) {
  Instance inst;
  inst.X = random_matrix(n, d, seed);
  inst.y = random_matrix(n, 1, seed + 1).col(0);
  inst.K = inst.X * inst.X.transpose();
  inst.K = 0.5 * (inst.K + inst.K.transpose().eval());
  return inst;
}

}  // namespace

TEST_CASE("scalar ridge base case") {
  Matrix K = Matrix::Constant(1, 1, 1.0);
  Vector y = Vector::Constant(1, 2.0);
  auto G = SketchOperator::make(SketchKind::Identity, 1, 1, 0);
  RegConfig cfg;
  cfg.lambda = 1.0;
  cfg.filter = FilterSpec::iterated_ridge(1);
  FitResult res = fit(K, y, G, cfg);
  Vector pred = predict(res, K);
  CHECK(pred(0) == doctest::Approx(1.0));
}

TEST_CASE("identity sketch with order-1 ridge equals the closed form") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Index n = 50;
    Instance inst = random_instance(n, 6, 10 * seed + 1);
    RegConfig cfg;
    cfg.lambda = 0.02 + 0.1 * static_cast<double>(seed);
    cfg.filter = FilterSpec::iterated_ridge(1);
    auto G = SketchOperator::make(SketchKind::Identity, n, n, 0);
    FitResult res = fit(inst.K, inst.y, G, cfg);
    Vector pred = predict(res, inst.K);

    Matrix reg = inst.K;
    reg.diagonal().array() += n * cfg.lambda;
    Vector ref = inst.K * reg.fullPivLu().solve(inst.y);
    CHECK((pred - ref).norm() <= 1e-8 * std::max(ref.norm(), 1.0));
  }
}

TEST_CASE("fit matches the direct feature-space evaluation for every sketch") {
  std::mt19937_64 rng(2024);
  const SketchKind kinds[] = {SketchKind::Identity, SketchKind::Gaussian,
                              SketchKind::Rademacher, SketchKind::RosHadamard,
                              SketchKind::RowSelection};
  int trial = 0;
  for (int rep = 0; rep < 10; ++rep) {
    for (SketchKind kind : kinds) {
      ++trial;
      const Index n = 20 + static_cast<Index>(rng() % 21);  // up to 40
      const Index d = 3 + static_cast<Index>(rng() % 8);    // up to 10
      Instance inst = random_instance(n, d, 500 + trial);
      const Index m = kind == SketchKind::Identity
                          ? n
                          : 2 + static_cast<Index>(rng() % (n - 1));
      auto G = SketchOperator::make(kind, m, n, 900 + trial);
      RegConfig cfg;
      cfg.lambda = std::max(1.0 / static_cast<double>(n),
                            0.05 + 0.4 * ((trial * 7) % 10) / 10.0);
      cfg.filter = (trial % 2) ? FilterSpec::iterated_ridge(1 + trial % 4)
                               : FilterSpec::spectral_cutoff(1.0 + trial % 3);

      Vector omega = feature_space_oracle(inst.X, inst.y, G, cfg.filter, cfg.lambda);
      FitResult res = fit(inst.K, inst.y, G, cfg);

      Matrix test = random_matrix(15, d, 700 + trial);
      Vector pred = predict(res, test * inst.X.transpose());
      Vector ref = test * omega;
      const double scale = std::max(ref.cwiseAbs().maxCoeff(), 1.0);
      CHECK((pred - ref).cwiseAbs().maxCoeff() <= 1e-7 * scale);

      // The fast feature-space path must agree as well.
      Vector w = fit_linear(inst.X, inst.y, G, cfg);
      CHECK((w - omega).cwiseAbs().maxCoeff() <= 1e-7 * std::max(omega.cwiseAbs().maxCoeff(), 1.0));
    }
  }
}

TEST_CASE("identity sketch with spectral cutoff equals truncated eigenregression") {
  const Index n = 30;
  Instance inst = random_instance(n, 5, 77);
  RegConfig cfg;
  cfg.lambda = 0.15;
  cfg.filter = FilterSpec::spectral_cutoff(2.0);
  auto G = SketchOperator::make(SketchKind::Identity, n, n, 0);
  FitResult res = fit(inst.K, inst.y, G, cfg);
  Vector pred = predict(res, inst.K);

  // Truncated spectral inversion of Kbar applied to y/n.
  Matrix K_bar = inst.K / static_cast<double>(n);
  auto eig = linalg::sym_eig(K_bar);
  Vector ref = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    if (eig.eigenvalues(i) < cfg.lambda) continue;
    const Vector v = eig.eigenvectors.col(i);
    ref += v * (v.dot(inst.y) / eig.eigenvalues(i));
  }
  ref = K_bar * ref;
  CHECK((pred - ref).norm() <= 1e-8 * std::max(ref.norm(), 1.0));
}

TEST_CASE("iterated ridge equals the iterated Tikhonov recursion") {
  const Index n = 24, d = 6;
  Instance inst = random_instance(n, d, 15);
  auto G = SketchOperator::make(SketchKind::Gaussian, 10, n, 16);
  for (int tau : {1, 2, 4, 6}) {
    RegConfig cfg;
    cfg.lambda = 0.09;
    cfg.filter = FilterSpec::iterated_ridge(tau);
    Vector w = fit_linear(inst.X, inst.y, G, cfg);

    Matrix T = inst.X.transpose() * inst.X / static_cast<double>(n);
    Matrix Q = mgs_orthonormalize(inst.X.transpose() * G.dense().transpose());
    Matrix P = Q * Q.transpose();
    Matrix PTP = P * T * P;
    Vector b = P * (inst.X.transpose() * inst.y / static_cast<double>(n));
    Matrix reg = PTP;
    reg.diagonal().array() += cfg.lambda;
    Vector omega = Vector::Zero(d);
    for (int i = 0; i < tau; ++i)
      omega = reg.fullPivLu().solve(b + cfg.lambda * omega);
    omega = P * omega;
    CHECK((w - omega).cwiseAbs().maxCoeff() <=
          1e-8 * std::max(omega.cwiseAbs().maxCoeff(), 1.0));
  }
}

TEST_CASE("fitted-value norm is nonincreasing in lambda for ridge") {
  const Index n = 40;
  Instance inst = random_instance(n, 8, 91);
  auto G = SketchOperator::make(SketchKind::Identity, n, n, 0);
  double prev = -1.0;
  for (double lambda : {1.0, 0.5, 0.2, 0.1, 0.05}) {
    RegConfig cfg;
    cfg.lambda = lambda;
    cfg.filter = FilterSpec::iterated_ridge(1);
    Vector pred = predict(fit(inst.K, inst.y, G, cfg), inst.K);
    if (prev >= 0.0) CHECK(pred.norm() >= prev - 1e-10);
    prev = pred.norm();
  }
}

TEST_CASE("primal weight extraction") {
  Matrix X(1, 2);
  X << 1, 0;
  Vector y = Vector::Constant(1, 2.0);
  Matrix K = X * X.transpose();
  auto G = SketchOperator::make(SketchKind::Identity, 1, 1, 0);
  RegConfig cfg;
  cfg.lambda = 1.0;
  cfg.filter = FilterSpec::iterated_ridge(1);
  FitResult res = fit(K, y, G, cfg);
  Vector w = extract_primal_weights(res, X);
  CHECK(w(0) == doctest::Approx(1.0));
  CHECK(w(1) == doctest::Approx(0.0));

  // Random case: 100 probes of <w, x> against kernel-space prediction.
  const Index n = 20, d = 4;
  Instance inst = random_instance(n, d, 55);
  auto Gs = SketchOperator::make(SketchKind::Rademacher, 8, n, 56);
  cfg.lambda = 0.2;
  cfg.filter = FilterSpec::iterated_ridge(2);
  FitResult res2 = fit(inst.K, inst.y, Gs, cfg);
  Vector w2 = extract_primal_weights(res2, inst.X);
  Matrix probes = random_matrix(100, d, 57);
  Vector pred = predict(res2, probes * inst.X.transpose());
  for (Index i = 0; i < 100; ++i)
    CHECK(std::abs(pred(i) - w2.dot(probes.row(i).transpose())) <=
          1e-10 * std::max(std::abs(pred(i)), 1.0));
}

TEST_CASE("primal extraction rejects non-linear kernels") {
  DataSet data;
  data.points = random_matrix(12, 3, 61) * 0.3;
  data.labels = random_matrix(12, 1, 62).col(0);
  Matrix K = gram(KernelSpec::gaussian(1.0), data);
  auto G = SketchOperator::make(SketchKind::Identity, 12, 12, 0);
  RegConfig cfg;
  cfg.lambda = 0.3;
  cfg.filter = FilterSpec::iterated_ridge(1);
  FitResult res = fit(K, data.labels, G, cfg);
  CHECK_THROWS_AS(extract_primal_weights(res, data.points), UnsupportedKernel);
}

TEST_CASE("lambda range is enforced unless overridden") {
  Instance inst = random_instance(10, 3, 71);
  auto G = SketchOperator::make(SketchKind::Identity, 10, 10, 0);
  RegConfig cfg;
  cfg.lambda = 2.0;
  cfg.filter = FilterSpec::iterated_ridge(1);
  CHECK_THROWS_AS(fit(inst.K, inst.y, G, cfg), InvalidRegularization);
  cfg.allow_lambda_outside = true;
  CHECK_NOTHROW(fit(inst.K, inst.y, G, cfg));
  cfg.allow_lambda_outside = false;
  cfg.lambda = 0.01;  // below 1/n
  CHECK_THROWS_AS(fit(inst.K, inst.y, G, cfg), InvalidRegularization);
}

TEST_CASE("degenerate sketches give the zero function") {
  Instance inst = random_instance(8, 3, 81);
  auto G = SketchOperator::row_selection(8, {0, 1}, {0.0, 0.0});
  RegConfig cfg;
  cfg.lambda = 0.5;
  cfg.filter = FilterSpec::spectral_cutoff(1.0);
  FitResult res = fit(inst.K, inst.y, G, cfg);
  CHECK(res.rank == 0);
  CHECK(res.beta.cwiseAbs().maxCoeff() == 0.0);
  CHECK(predict(res, inst.K).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("invalid inputs are rejected") {
  Instance inst = random_instance(6, 2, 85);
  auto G = SketchOperator::make(SketchKind::Identity, 6, 6, 0);
  RegConfig cfg;
  cfg.lambda = 0.5;
  cfg.filter = FilterSpec::iterated_ridge(1);
  Vector bad_y = inst.y;
  bad_y(0) = std::nan("");
  CHECK_THROWS_AS(fit(inst.K, bad_y, G, cfg), InvalidInput);
  CHECK_THROWS_AS(fit(inst.K, Vector::Zero(5), G, cfg), ShapeMismatch);
  FitResult res = fit(inst.K, inst.y, G, cfg);
  CHECK_THROWS_AS(predict(res, Matrix::Zero(2, 5)), ShapeMismatch);
}
