#include <doctest.h>

#include <cmath>
#include <random>

#include "sketchreg/errors.hpp"
#include "sketchreg/kernels.hpp"
#include "sketchreg/linalg.hpp"

using namespace sketchreg;

namespace {

Vector vec1(double x) {
  Vector v(1);
  v(0) = x;
  return v;
}

DataSet make_test_data(const KernelSpec& spec, Index n, Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DataSet data;
  data.points.resize(n, d);
  data.labels = Vector::Zero(n);
  if (spec.family == KernelFamily::SobolevSpline) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Index i = 0; i < n; ++i) data.points(i, 0) = unit(rng);
  } else {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < d; ++j) data.points(i, j) = normal(rng);
      if (spec.family == KernelFamily::Linear)
        data.points.row(i) *= 0.5 / std::max(data.points.row(i).norm(), 1.0);
    }
  }
  return data;
}

}  // namespace

TEST_CASE("eval_kernel pointwise values") {
  auto sob = KernelSpec::sobolev_spline();
  CHECK(eval_kernel(sob, vec1(0.5), vec1(0.5)) == doctest::Approx(0.25));
  CHECK(eval_kernel(sob, vec1(0.2), vec1(0.7)) == doctest::Approx((1.0 - 0.7) * 0.2));

  auto gauss = KernelSpec::gaussian(1.3);
  Vector x(3);
  x << 0.1, -0.4, 2.0;
  CHECK(eval_kernel(gauss, x, x) == doctest::Approx(1.0));

  auto lin = KernelSpec::linear(10.0);
  Vector a(2), b(2);
  a << 1, 2;
  b << 3, -1;
  CHECK(eval_kernel(lin, a, b) == doctest::Approx(1.0));
}

TEST_CASE("eval_kernel symmetry and domain errors") {
  auto sob = KernelSpec::sobolev_spline();
  CHECK(eval_kernel(sob, vec1(0.3), vec1(0.8)) ==
        eval_kernel(sob, vec1(0.8), vec1(0.3)));
  CHECK_THROWS_AS(eval_kernel(sob, vec1(1.5), vec1(0.5)), DomainError);
  CHECK_THROWS_AS(eval_kernel(sob, vec1(-0.1), vec1(0.5)), DomainError);

  auto lin = KernelSpec::linear(1.0);
  Vector big(2);
  big << 3.0, 0.0;  // squared norm 9 > kappa_sq
  CHECK_THROWS_AS(eval_kernel(lin, big, big), DomainError);
  CHECK_THROWS_AS(KernelSpec::linear(0.0), InvalidInput);
  CHECK_THROWS_AS(KernelSpec::gaussian(-1.0), InvalidInput);
}

TEST_CASE("gram trivial cases") {
  DataSet one;
  one.points = Matrix::Zero(1, 2);
  one.labels = Vector::Zero(1);
  Matrix K = gram(KernelSpec::gaussian(1.0), one);
  CHECK(K.rows() == 1);
  CHECK(K(0, 0) == doctest::Approx(1.0));

  DataSet two;
  two.points.resize(2, 2);
  two.points << 1, 0, 1, 0;
  two.labels = Vector::Zero(2);
  Matrix K2 = gram(KernelSpec::linear(2.0), two);
  CHECK((K2 - Matrix::Ones(2, 2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gram matches entrywise scalar recomputation") {
  const KernelSpec specs[] = {KernelSpec::linear(1.0), KernelSpec::gaussian(0.8),
                              KernelSpec::sobolev_spline()};
  for (const auto& spec : specs) {
    const Index d = spec.family == KernelFamily::SobolevSpline ? 1 : 3;
    DataSet data = make_test_data(spec, 5, d, 11);
    Matrix K = gram(spec, data);
    for (Index i = 0; i < 5; ++i) {
      for (Index j = 0; j < 5; ++j) {
        double ref;
        if (spec.family == KernelFamily::Linear) {
          ref = 0.0;
          for (Index k = 0; k < d; ++k) ref += data.points(i, k) * data.points(j, k);
        } else if (spec.family == KernelFamily::Gaussian) {
          double d2 = 0.0;
          for (Index k = 0; k < d; ++k) {
            const double diff = data.points(i, k) - data.points(j, k);
            d2 += diff * diff;
          }
          ref = std::exp(-d2 / (2.0 * spec.bandwidth * spec.bandwidth));
        } else {
          const double lo = std::min(data.points(i, 0), data.points(j, 0));
          const double hi = std::max(data.points(i, 0), data.points(j, 0));
          ref = (1.0 - hi) * lo;
        }
        CHECK(std::abs(K(i, j) - ref) <= 1e-14);
      }
    }
  }
}

TEST_CASE("gram symmetry is bit-exact and spectrum is PSD") {
  const KernelSpec specs[] = {KernelSpec::linear(1.0), KernelSpec::gaussian(1.0),
                              KernelSpec::sobolev_spline()};
  for (const auto& spec : specs) {
    const Index d = spec.family == KernelFamily::SobolevSpline ? 1 : 4;
    DataSet data = make_test_data(spec, 20, d, 5);
    Matrix K = gram(spec, data);
    for (Index i = 0; i < K.rows(); ++i)
      for (Index j = 0; j < i; ++j) CHECK(K(i, j) == K(j, i));
    auto eig = linalg::sym_eig(K);
    CHECK(eig.eigenvalues(K.rows() - 1) >= -1e-10 * std::max(eig.eigenvalues(0), 1.0));
    CHECK(K.diagonal().maxCoeff() <= spec.kappa_sq + 1e-12);
  }
}

TEST_CASE("cross_gram agrees with gram on the training set") {
  auto spec = KernelSpec::gaussian(1.0);
  DataSet data = make_test_data(spec, 8, 3, 21);
  Matrix K = gram(spec, data);
  Matrix C = cross_gram(spec, data, data.points);
  CHECK((C - K).cwiseAbs().maxCoeff() <= 1e-14);

  auto lin = KernelSpec::linear(1.0);
  DataSet ld = make_test_data(lin, 6, 2, 22);
  Matrix Kl = gram(lin, ld);
  Matrix row = cross_gram(lin, ld, ld.points.row(0));
  CHECK((row.transpose() - Kl.col(0)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("cross_gram entrywise oracle and shape checks") {
  auto spec = KernelSpec::gaussian(1.4);
  DataSet data = make_test_data(spec, 5, 3, 31);
  Matrix test = make_test_data(spec, 4, 3, 32).points;
  Matrix C = cross_gram(spec, data, test);
  for (Index a = 0; a < 4; ++a)
    for (Index i = 0; i < 5; ++i) {
      const double ref = eval_kernel(spec, test.row(a).transpose(),
                                     data.points.row(i).transpose());
      CHECK(std::abs(C(a, i) - ref) <= 1e-14);
    }
  CHECK_THROWS_AS(cross_gram(spec, data, Matrix::Zero(2, 5)), ShapeMismatch);
}

TEST_CASE("validate_dataset rejects malformed input") {
  DataSet bad;
  bad.points = Matrix::Zero(2, 1);
  bad.labels = Vector::Zero(3);
  CHECK_THROWS_AS(validate_dataset(KernelSpec::gaussian(1.0), bad), ShapeMismatch);
  DataSet nan_labels;
  nan_labels.points = Matrix::Zero(1, 1);
  nan_labels.labels = Vector::Constant(1, std::nan(""));
  CHECK_THROWS_AS(validate_dataset(KernelSpec::gaussian(1.0), nan_labels),
                  InvalidValue);
}
