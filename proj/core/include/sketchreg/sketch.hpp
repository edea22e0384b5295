#pragma once

#include <cstdint>
#include <vector>

#include "sketchreg/types.hpp"

namespace sketchreg {

enum class SketchKind { Gaussian, Rademacher, RosHadamard, RowSelection, Identity };

// Randomized m x n sketch operator. Dense kinds (gaussian, rademacher) are
// materialized; ros_hadamard keeps only its sign vector and selected rows and
// applies through the fast Walsh-Hadamard transform; row_selection keeps
// indices and per-row weights. Construction is fully determined by
// (kind, m, n, seed).
class SketchOperator {
 public:
  SketchKind kind() const { return kind_; }
  Index rows() const { return m_; }
  Index cols() const { return n_; }
  std::uint64_t seed() const { return seed_; }

  // G * A for A with n rows.
  Matrix apply(const Matrix& A) const;
  Vector apply(const Vector& v) const;

  // G^T * B for B with m rows.
  Matrix apply_transpose(const Matrix& B) const;
  Vector apply_transpose(const Vector& v) const;

  // Explicit m x n matrix; intended for tests and small problems.
  Matrix dense() const;

  const std::vector<Index>& selection_indices() const { return indices_; }
  const std::vector<double>& selection_weights() const { return weights_; }

  static SketchOperator make(SketchKind kind, Index m, Index n, std::uint64_t seed);
  static SketchOperator row_selection(Index n, std::vector<Index> indices,
                                      std::vector<double> weights);

 private:
  SketchOperator() = default;

  SketchKind kind_ = SketchKind::Identity;
  Index m_ = 0;
  Index n_ = 0;
  std::uint64_t seed_ = 0;

  Matrix dense_;                  // gaussian, rademacher
  std::vector<Index> indices_;    // row_selection rows; ros selected rows of H
  std::vector<double> weights_;   // row_selection weights
  std::vector<double> signs_;     // ros random diagonal, length n_pad
  Index n_pad_ = 0;
  double ros_scale_ = 0.0;        // sqrt(n_pad/m)/n_pad
};

// Convenience alias for make(...).
SketchOperator make_sketch(SketchKind kind, Index m, Index n, std::uint64_t seed);

// In-place unnormalized Walsh-Hadamard transform; length must be a power of
// two. Applying twice multiplies by the length.
void fwht(Eigen::Ref<Vector> v);
std::vector<double> fwht(const std::vector<double>& v);

struct DistortionReport {
  double max_relative_distortion = 0.0;
};

// Max over the probe set of |  ||G a||^2 - ||a||^2 | / ||a||^2.
DistortionReport distortion_probe(const SketchOperator& G,
                                  const std::vector<Vector>& vectors);

}  // namespace sketchreg
