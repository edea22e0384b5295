#include "sketchreg/sketch.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "sketchreg/errors.hpp"
#include "sketchreg/rng.hpp"

namespace sketchreg {

namespace {

Index next_pow2(Index n) {
  Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

// First m entries of a random permutation of [0, n).
std::vector<Index> sample_without_replacement(Index n, Index m, std::mt19937_64& rng) {
  std::vector<Index> idx(n);
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = 0; i < m; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(m);
  return idx;
}

}  // namespace

SketchOperator SketchOperator::make(SketchKind kind, Index m, Index n,
                                    std::uint64_t seed) {
  if (m < 1 || n < 1) throw InvalidDimension("sketch dimensions must be >= 1");
  if (kind == SketchKind::Identity && m != n)
    throw ShapeMismatch("identity sketch requires m == n");
  if (kind == SketchKind::RowSelection && m > n)
    throw InvalidDimension("row selection cannot pick more rows than n");

  SketchOperator G;
  G.kind_ = kind;
  G.m_ = m;
  G.n_ = n;
  G.seed_ = seed;
  auto rng = make_rng(seed);

  switch (kind) {
    case SketchKind::Identity:
      break;
    case SketchKind::Gaussian: {
      std::normal_distribution<double> normal(0.0, 1.0);
      const double s = 1.0 / std::sqrt(static_cast<double>(m));
      G.dense_.resize(m, n);
      for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < n; ++j) G.dense_(i, j) = s * normal(rng);
      break;
    }
    case SketchKind::Rademacher: {
      const double s = 1.0 / std::sqrt(static_cast<double>(m));
      G.dense_.resize(m, n);
      for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < n; ++j)
          G.dense_(i, j) = (rng() & 1u) ? s : -s;
      break;
    }
    case SketchKind::RosHadamard: {
      G.n_pad_ = next_pow2(n);
      G.signs_.resize(G.n_pad_);
      for (Index j = 0; j < G.n_pad_; ++j) G.signs_[j] = (rng() & 1u) ? 1.0 : -1.0;
      G.indices_ = sample_without_replacement(G.n_pad_, m, rng);
      G.ros_scale_ = std::sqrt(static_cast<double>(G.n_pad_) / m) / G.n_pad_;
      break;
    }
    case SketchKind::RowSelection: {
      G.indices_ = sample_without_replacement(n, m, rng);
      G.weights_.assign(m, 1.0);
      break;
    }
  }
  return G;
}

SketchOperator SketchOperator::row_selection(Index n, std::vector<Index> indices,
                                             std::vector<double> weights) {
  if (indices.size() != weights.size())
    throw ShapeMismatch("indices and weights differ in length");
  if (indices.empty()) throw InvalidDimension("row selection needs at least one row");
  for (Index i : indices)
    if (i < 0 || i >= n) throw InvalidInput("selection index out of range");
  SketchOperator G;
  G.kind_ = SketchKind::RowSelection;
  G.m_ = static_cast<Index>(indices.size());
  G.n_ = n;
  G.indices_ = std::move(indices);
  G.weights_ = std::move(weights);
  return G;
}

SketchOperator make_sketch(SketchKind kind, Index m, Index n, std::uint64_t seed) {
  return SketchOperator::make(kind, m, n, seed);
}

void fwht(Eigen::Ref<Vector> v) {
  const Index n = v.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw InvalidLength("fwht requires a power-of-two length");
  for (Index h = 1; h < n; h <<= 1) {
    for (Index i = 0; i < n; i += h << 1) {
      for (Index j = i; j < i + h; ++j) {
        const double a = v(j);
        const double b = v(j + h);
        v(j) = a + b;
        v(j + h) = a - b;
      }
    }
  }
}

std::vector<double> fwht(const std::vector<double>& v) {
  Vector w = Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
  fwht(w);
  return std::vector<double>(w.data(), w.data() + w.size());
}

Matrix SketchOperator::apply(const Matrix& A) const {
  if (A.rows() != n_) throw ShapeMismatch("matrix row count does not match sketch n");
  switch (kind_) {
    case SketchKind::Identity:
      return A;
    case SketchKind::Gaussian:
    case SketchKind::Rademacher:
      return dense_ * A;
    case SketchKind::RowSelection: {
      Matrix out(m_, A.cols());
      for (Index i = 0; i < m_; ++i)
        out.row(i) = weights_[i] * A.row(indices_[i]);
      return out;
    }
    case SketchKind::RosHadamard: {
      Matrix out(m_, A.cols());
      Vector work(n_pad_);
      for (Index c = 0; c < A.cols(); ++c) {
        work.setZero();
        for (Index j = 0; j < n_; ++j) work(j) = signs_[j] * A(j, c);
        fwht(work);
        for (Index i = 0; i < m_; ++i) out(i, c) = ros_scale_ * work(indices_[i]);
      }
      return out;
    }
  }
  throw InvalidInput("unknown sketch kind");
}

Vector SketchOperator::apply(const Vector& v) const {
  return apply(Matrix(v)).col(0);
}

Matrix SketchOperator::apply_transpose(const Matrix& B) const {
  if (B.rows() != m_) throw ShapeMismatch("matrix row count does not match sketch m");
  switch (kind_) {
    case SketchKind::Identity:
      return B;
    case SketchKind::Gaussian:
    case SketchKind::Rademacher:
      return dense_.transpose() * B;
    case SketchKind::RowSelection: {
      Matrix out = Matrix::Zero(n_, B.cols());
      for (Index i = 0; i < m_; ++i)
        out.row(indices_[i]) += weights_[i] * B.row(i);
      return out;
    }
    case SketchKind::RosHadamard: {
      Matrix out(n_, B.cols());
      Vector work(n_pad_);
      for (Index c = 0; c < B.cols(); ++c) {
        work.setZero();
        for (Index i = 0; i < m_; ++i) work(indices_[i]) += ros_scale_ * B(i, c);
        fwht(work);
        for (Index j = 0; j < n_; ++j) out(j, c) = signs_[j] * work(j);
      }
      return out;
    }
  }
  throw InvalidInput("unknown sketch kind");
}

Vector SketchOperator::apply_transpose(const Vector& v) const {
  return apply_transpose(Matrix(v)).col(0);
}

Matrix SketchOperator::dense() const {
  switch (kind_) {
    case SketchKind::Identity:
      return Matrix::Identity(m_, n_);
    case SketchKind::Gaussian:
    case SketchKind::Rademacher:
      return dense_;
    default:
      return apply(Matrix(Matrix::Identity(n_, n_)));
  }
}

DistortionReport distortion_probe(const SketchOperator& G,
                                  const std::vector<Vector>& vectors) {
  if (vectors.empty()) throw InvalidInput("distortion probe needs vectors");
  DistortionReport rep;
  for (const Vector& a : vectors) {
    const double norm2 = a.squaredNorm();
    if (norm2 == 0.0) throw InvalidInput("zero vector in distortion probe");
    const double sk = G.apply(a).squaredNorm();
    rep.max_relative_distortion =
        std::max(rep.max_relative_distortion, std::abs(sk - norm2) / norm2);
  }
  return rep;
}

}  // namespace sketchreg
