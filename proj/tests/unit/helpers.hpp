#pragma once

#include <random>
#include <vector>

#include "csk/types.hpp"

namespace testing {

inline csk::Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                                 double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  csk::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

inline csk::Matrix random_unit_kernel(std::mt19937_64& rng, Eigen::Index k1, Eigen::Index k2) {
  csk::Matrix k = random_matrix(rng, k1, k2);
  return k / k.norm();
}

inline double max_abs_diff(const csk::Matrix& a, const csk::Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testing
