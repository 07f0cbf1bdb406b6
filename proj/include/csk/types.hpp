#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace csk {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Spectrum =
    Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One subject's H0 x N feature matrix.
using SubjectBlock = Matrix;
/// K maps of identical shape, one per kernel.
using FeatureMapStack = std::vector<Matrix>;
using SpectrumStack = std::vector<Spectrum>;

struct Shape {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  Eigen::Index size() const { return rows * cols; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

inline Shape shape_of(const Matrix& m) { return {m.rows(), m.cols()}; }

}  // namespace csk
