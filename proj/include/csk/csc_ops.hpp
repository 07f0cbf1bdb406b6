#pragma once

#include <span>

#include "csk/types.hpp"

namespace csk {

class KernelBank;

/// Binary mask selecting a k1 x k2 kernel support anchored at the top-left of a
/// padded grid.
class SupportMask {
 public:
  SupportMask(Shape padded, Eigen::Index k1, Eigen::Index k2);

  Shape shape() const { return shape_; }
  Eigen::Index k1() const { return k1_; }
  Eigen::Index k2() const { return k2_; }
  bool contains(Eigen::Index i, Eigen::Index j) const { return i < k1_ && j < k2_; }
  Matrix matrix() const;

 private:
  Shape shape_;
  Eigen::Index k1_;
  Eigen::Index k2_;
};

/// Zero-pads a kernel to `shape`, kernel origin at (0, 0).
Matrix pad_kernel(const Matrix& kernel, Shape shape);

/// Circular 2-D convolution of the zero-padded kernel with `map`:
/// out(i, j) = sum_{p,q} kernel(p, q) * map((i - p) mod H, (j - q) mod N).
Matrix conv2_circular(const Matrix& kernel, const Matrix& map);

double soft_threshold(double x, double alpha);
Matrix soft_threshold(const Matrix& x, double alpha);

/// Masks z to the support and radially projects onto the unit 2-norm ball.
Matrix project_kernel(const Matrix& z, const SupportMask& support);

/// 1/2 sum_m ||x_m - sum_k d_k * e_{m,k}||^2 + eta sum_{m,k} ||e_{m,k}||_1.
double csc_objective(std::span<const SubjectBlock> xs, const KernelBank& kernels,
                     std::span<const FeatureMapStack> maps, double eta);

/// Per frequency, solves (I_K + lambda d d^H) y = r by the rank-one inversion
/// lemma, where d = (d_hat[0](w), ..., d_hat[K-1](w)).
SpectrumStack apply_inv_lemma_coding(const SpectrumStack& d_hat, const SpectrumStack& rhs,
                                     double lambda);

enum class DictSolvePath {
  automatic,  ///< reduced when M < K, direct otherwise
  reduced,    ///< inversion lemma through an M x M system
  direct,     ///< K x K system
};

/// Per frequency, solves (I_K + lambda E^H E) y = r where E(w) is the M x K
/// matrix e_hat[m][k](w).
SpectrumStack apply_inv_lemma_dict(const std::vector<SpectrumStack>& e_hat,
                                   const SpectrumStack& rhs, double lambda,
                                   DictSolvePath path = DictSolvePath::automatic);

}  // namespace csk
