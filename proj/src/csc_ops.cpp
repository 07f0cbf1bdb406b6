#include "csk/csc_ops.hpp"

#include <cassert>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "csk/error.hpp"
#include "csk/fft.hpp"
#include "csk/kernel_bank.hpp"

namespace csk {

SupportMask::SupportMask(Shape padded, Eigen::Index k1, Eigen::Index k2)
    : shape_(padded), k1_(k1), k2_(k2) {
  if (k1 < 1 || k2 < 1 || k1 > padded.rows || k2 > padded.cols)
    throw InvalidInput("SupportMask: support " + std::to_string(k1) + "x" + std::to_string(k2) +
                       " does not fit grid " + std::to_string(padded.rows) + "x" +
                       std::to_string(padded.cols));
}

Matrix SupportMask::matrix() const {
  Matrix m = Matrix::Zero(shape_.rows, shape_.cols);
  m.topLeftCorner(k1_, k2_).setOnes();
  return m;
}

Matrix pad_kernel(const Matrix& kernel, Shape shape) {
  if (kernel.rows() > shape.rows || kernel.cols() > shape.cols)
    throw InvalidInput("pad_kernel: kernel larger than grid");
  Matrix out = Matrix::Zero(shape.rows, shape.cols);
  out.topLeftCorner(kernel.rows(), kernel.cols()) = kernel;
  return out;
}

Matrix conv2_circular(const Matrix& kernel, const Matrix& map) {
  if (kernel.rows() > map.rows() || kernel.cols() > map.cols() || kernel.size() == 0)
    throw InvalidInput("conv2_circular: kernel must be nonempty and fit inside the map");
  const Fft2d fft(shape_of(map));
  const Spectrum prod = fft.symbol(pad_kernel(kernel, shape_of(map))).cwiseProduct(fft.forward(map));
  return fft.inverse_real(prod);
}

double soft_threshold(double x, double alpha) {
  if (alpha < 0.0) throw InvalidInput("soft_threshold: negative threshold");
  if (x > alpha) return x - alpha;
  if (x < -alpha) return x + alpha;
  return 0.0;
}

Matrix soft_threshold(const Matrix& x, double alpha) {
  if (alpha < 0.0) throw InvalidInput("soft_threshold: negative threshold");
  return x.unaryExpr([alpha](double v) {
    if (v > alpha) return v - alpha;
    if (v < -alpha) return v + alpha;
    return 0.0;
  });
}

Matrix project_kernel(const Matrix& z, const SupportMask& support) {
  if (shape_of(z) != support.shape()) throw InvalidInput("project_kernel: shape mismatch");
  Matrix m = Matrix::Zero(z.rows(), z.cols());
  m.topLeftCorner(support.k1(), support.k2()) = z.topLeftCorner(support.k1(), support.k2());
  const double norm = m.norm();
  if (norm > 1.0) m /= norm;
  return m;
}

double csc_objective(std::span<const SubjectBlock> xs, const KernelBank& kernels,
                     std::span<const FeatureMapStack> maps, double eta) {
  if (xs.size() != maps.size()) throw InvalidInput("csc_objective: block/map count mismatch");
  const Shape shape = kernels.padded_shape();
  const Fft2d fft(shape);
  SpectrumStack symbols;
  for (std::size_t k = 0; k < kernels.size(); ++k) symbols.push_back(fft.symbol(kernels.padded(k)));

  double fit = 0.0;
  double l1 = 0.0;
  for (std::size_t m = 0; m < xs.size(); ++m) {
    if (shape_of(xs[m]) != shape || maps[m].size() != kernels.size())
      throw InvalidInput("csc_objective: shape mismatch at block " + std::to_string(m));
    Spectrum recon = Spectrum::Zero(shape.rows, shape.cols);
    for (std::size_t k = 0; k < kernels.size(); ++k) {
      if (shape_of(maps[m][k]) != shape)
        throw InvalidInput("csc_objective: map shape mismatch at block " + std::to_string(m));
      recon += symbols[k].cwiseProduct(fft.forward(maps[m][k]));
      l1 += maps[m][k].cwiseAbs().sum();
    }
    fit += (xs[m] - fft.inverse_real(recon)).squaredNorm();
  }
  return 0.5 * fit + eta * l1;
}

namespace {

void check_stack(const SpectrumStack& s, Shape shape, std::size_t k, const char* what) {
  if (s.size() != k) throw InvalidInput(std::string(what) + ": spectrum count mismatch");
  for (const auto& x : s)
    if (Shape{x.rows(), x.cols()} != shape)
      throw InvalidInput(std::string(what) + ": spectrum shape mismatch");
}

}  // namespace

SpectrumStack apply_inv_lemma_coding(const SpectrumStack& d_hat, const SpectrumStack& rhs,
                                     double lambda) {
  if (d_hat.empty()) throw InvalidInput("apply_inv_lemma_coding: empty kernel spectra");
  const Shape shape{d_hat.front().rows(), d_hat.front().cols()};
  const std::size_t k_count = d_hat.size();
  check_stack(d_hat, shape, k_count, "apply_inv_lemma_coding");
  check_stack(rhs, shape, k_count, "apply_inv_lemma_coding");

  SpectrumStack out = rhs;
  const Eigen::Index n = shape.size();
  for (Eigen::Index p = 0; p < n; ++p) {
    std::complex<double> dot = 0.0;
    double energy = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      const auto d = d_hat[k].data()[p];
      dot += std::conj(d) * rhs[k].data()[p];
      energy += std::norm(d);
    }
    const std::complex<double> coef = lambda * dot / (1.0 + lambda * energy);
    for (std::size_t k = 0; k < k_count; ++k) out[k].data()[p] -= coef * d_hat[k].data()[p];
  }
  return out;
}

SpectrumStack apply_inv_lemma_dict(const std::vector<SpectrumStack>& e_hat,
                                   const SpectrumStack& rhs, double lambda, DictSolvePath path) {
  if (e_hat.empty()) throw InvalidInput("apply_inv_lemma_dict: need M >= 1");
  if (rhs.empty()) throw InvalidInput("apply_inv_lemma_dict: empty right-hand side");
  const auto m_count = static_cast<Eigen::Index>(e_hat.size());
  const auto k_count = static_cast<Eigen::Index>(rhs.size());
  const Shape shape{rhs.front().rows(), rhs.front().cols()};
  check_stack(rhs, shape, rhs.size(), "apply_inv_lemma_dict");
  for (const auto& row : e_hat) check_stack(row, shape, rhs.size(), "apply_inv_lemma_dict");

  const bool reduced = path == DictSolvePath::reduced ||
                       (path == DictSolvePath::automatic && m_count < k_count);
  SpectrumStack out = rhs;
  Eigen::MatrixXcd e(m_count, k_count);
  Eigen::VectorXcd r(k_count);
  for (Eigen::Index p = 0; p < shape.size(); ++p) {
    for (Eigen::Index m = 0; m < m_count; ++m)
      for (Eigen::Index k = 0; k < k_count; ++k) e(m, k) = e_hat[m][k].data()[p];
    for (Eigen::Index k = 0; k < k_count; ++k) r(k) = rhs[k].data()[p];

    Eigen::VectorXcd y;
    if (reduced) {
      Eigen::MatrixXcd small = lambda * (e * e.adjoint());
      small.diagonal().array() += 1.0;
      Eigen::LLT<Eigen::MatrixXcd> llt(small);
      assert(llt.info() == Eigen::Success);
      y = r - lambda * (e.adjoint() * llt.solve(e * r));
    } else {
      Eigen::MatrixXcd full = lambda * (e.adjoint() * e);
      full.diagonal().array() += 1.0;
      Eigen::LLT<Eigen::MatrixXcd> llt(full);
      assert(llt.info() == Eigen::Success);
      y = llt.solve(r);
    }
    for (Eigen::Index k = 0; k < k_count; ++k) out[k].data()[p] = y(k);
  }
  return out;
}

}  // namespace csk
