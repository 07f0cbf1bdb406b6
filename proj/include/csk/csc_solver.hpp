#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>

#include "csk/csc_ops.hpp"
#include "csk/fft.hpp"
#include "csk/kernel_bank.hpp"
#include "csk/signal.hpp"
#include "csk/types.hpp"

namespace csk {

/// ADMM parameters shared by the coding and dictionary subproblems.
///
/// lambda is the data-fit weight (1/rho) and alpha the soft threshold, so the
/// coding subproblem minimizes 1/2 ||De - x||^2 + eta ||e||_1 with eta = alpha / lambda.
struct SolverConfig {
  double lambda = 1.0;
  double alpha = 0.05;
  double gamma = 1.0;  ///< relaxation factor, (0, 2]
  int outer_iters = 100;
  int coding_iters = 10;
  int dict_iters = 10;
  double residual_tol = 0.0;  ///< 0 disables early stopping
  std::uint64_t seed = 1;

  double eta() const { return alpha / lambda; }
  /// Throws InvalidInput when a field is out of range.
  void validate() const;
};

struct CodingState {
  FeatureMapStack e, b, u;

  static CodingState zeros(std::size_t k, Shape shape);
};

struct DictState {
  std::vector<Matrix> d, c, v;  ///< padded to the block shape

  /// d = c = padded kernels, v = 0.
  static DictState from_bank(const KernelBank& bank);
};

/// Spectral data for coding one block against a fixed kernel bank.
class CodingOperator {
 public:
  CodingOperator(const KernelBank& kernels, double lambda);

  std::size_t kernel_count() const { return conj_symbols_.size(); }
  Shape shape() const { return fft_.shape(); }
  const Fft2d& fft() const { return fft_; }

  /// lambda D^H x in the spectral domain.
  SpectrumStack data_term(const SubjectBlock& x) const;
  /// argmin_e lambda/2 ||De - x||^2 + 1/2 ||e - target||^2, given data_term(x).
  FeatureMapStack solve(const SpectrumStack& data_term, const FeatureMapStack& target) const;

 private:
  Fft2d fft_;
  SpectrumStack conj_symbols_;
  double lambda_;
};

/// Spectral data for the kernel update with feature maps fixed. The per-frequency
/// system I + lambda E^H E is factored once (through the M x M form when M < K).
class DictOperator {
 public:
  DictOperator(std::span<const FeatureMapStack> maps, std::span<const SubjectBlock> xs,
               double lambda);

  std::size_t kernel_count() const { return data_term_.size(); }
  Shape shape() const { return fft_.shape(); }

  /// argmin_d lambda/2 ||Ed - x||^2 + 1/2 ||d - target||^2.
  std::vector<Matrix> solve(const std::vector<Matrix>& target) const;

 private:
  struct Frequency {
    Eigen::LLT<Eigen::MatrixXcd> llt;
    Eigen::MatrixXcd e;  ///< only kept for the reduced path
  };

  Fft2d fft_;
  double lambda_;
  bool reduced_;
  SpectrumStack data_term_;
  std::vector<Frequency> freqs_;
};

/// One relaxed coding iteration:
///   e' = (I + lambda D^T D)^{-1} (lambda D^T x + b - u)
///   u' = u + e' - b,  b' = S_alpha(e' + u')
///   (b, u) <- (b, u) - gamma ((b, u) - (b', u'))
CodingState code_step(const CodingState& state, const CodingOperator& op,
                      const SpectrumStack& data_term, const SolverConfig& cfg);
CodingState code_step(const CodingState& state, const KernelBank& kernels, const SubjectBlock& x,
                      const SolverConfig& cfg);

/// One unrelaxed ADMM coding iteration: e' as above, b' = S_alpha(e' + u),
/// u' = u + e' - b'.
CodingState code_step_plain(const CodingState& state, const CodingOperator& op,
                            const SpectrumStack& data_term, const SolverConfig& cfg);

/// One relaxed kernel iteration:
///   d' = (I + lambda E^T E)^{-1} (lambda E^T x + c - v)
///   v' = v + d' - c,  c' = project(d' + v')
///   (c, v) <- (c, v) - gamma ((c, v) - (c', v'))
DictState dict_step(const DictState& state, const DictOperator& op, const SupportMask& support,
                    const SolverConfig& cfg);
DictState dict_step(const DictState& state, std::span<const FeatureMapStack> maps,
                    std::span<const SubjectBlock> xs, const SupportMask& support,
                    const SolverConfig& cfg);

/// Unrelaxed ADMM kernel iteration: c' = project(d' + v), v' = v + d' - c'.
DictState dict_step_plain(const DictState& state, const DictOperator& op,
                          const SupportMask& support, const SolverConfig& cfg);

struct CodingResult {
  FeatureMapStack maps;  ///< the sparse split variable b
  int iterations = 0;
  double residual = 0.0;  ///< max(primal, dual) at the last iteration
};

/// Codes one block from e = b = u = 0 for up to cfg.coding_iters steps.
CodingResult solve_coding_detailed(const SubjectBlock& x, const CodingOperator& op,
                                   const SolverConfig& cfg);
FeatureMapStack solve_coding(const SubjectBlock& x, const KernelBank& kernels,
                             const SolverConfig& cfg);

/// Unit-norm Gaussian kernels drawn from `seed`.
KernelBank initial_kernels(std::size_t k, std::pair<Eigen::Index, Eigen::Index> kernel_size,
                           Shape padded, std::uint64_t seed);

/// Alternating kernel learning: outer_iters rounds of coding every block
/// (coding_iters steps from zero) followed by dict_iters kernel steps started
/// from the current kernels with v = 0. Blocks are coded on `threads` workers
/// (0 = all cores); results do not depend on the thread count.
KernelBank learn_kernels(const SourceDomain& source, std::size_t k,
                         std::pair<Eigen::Index, Eigen::Index> kernel_size,
                         const SolverConfig& cfg, unsigned threads = 1);

/// Same as above starting from a given bank instead of initial_kernels().
KernelBank learn_kernels_from(const SourceDomain& source, KernelBank init, const SolverConfig& cfg,
                              unsigned threads = 1);

}  // namespace csk
