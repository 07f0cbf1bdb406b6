#include "csk/csc_solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "csk/error.hpp"
#include "csk/parallel.hpp"

namespace csk {

void SolverConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidInput("solver: lambda must be > 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidInput("solver: alpha must be >= 0");
  if (!(gamma > 0.0 && gamma <= 2.0)) throw InvalidInput("solver: gamma must lie in (0, 2]");
  if (outer_iters < 1 || coding_iters < 1 || dict_iters < 1)
    throw InvalidInput("solver: iteration counts must be >= 1");
  if (!(residual_tol >= 0.0)) throw InvalidInput("solver: residual_tol must be >= 0");
}

CodingState CodingState::zeros(std::size_t k, Shape shape) {
  const FeatureMapStack z(k, Matrix::Zero(shape.rows, shape.cols));
  return {z, z, z};
}

DictState DictState::from_bank(const KernelBank& bank) {
  DictState s;
  for (std::size_t k = 0; k < bank.size(); ++k) {
    s.c.push_back(bank.padded(k));
    s.v.push_back(Matrix::Zero(bank.padded_shape().rows, bank.padded_shape().cols));
  }
  s.d = s.c;
  return s;
}

// ---------------------------------------------------------------------------
// Coding

CodingOperator::CodingOperator(const KernelBank& kernels, double lambda)
    : fft_(kernels.padded_shape()), lambda_(lambda) {
  for (std::size_t k = 0; k < kernels.size(); ++k)
    conj_symbols_.push_back(fft_.symbol(kernels.padded(k)).conjugate());
}

SpectrumStack CodingOperator::data_term(const SubjectBlock& x) const {
  if (shape_of(x) != shape()) throw InvalidInput("coding: block shape differs from kernel grid");
  const Spectrum xs = fft_.forward(x);
  SpectrumStack out;
  out.reserve(conj_symbols_.size());
  for (const auto& s : conj_symbols_) out.push_back(lambda_ * s.cwiseProduct(xs));
  return out;
}

FeatureMapStack CodingOperator::solve(const SpectrumStack& data_term,
                                      const FeatureMapStack& target) const {
  SpectrumStack rhs(data_term.size());
  for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = data_term[k] + fft_.forward(target[k]);
  const SpectrumStack y = apply_inv_lemma_coding(conj_symbols_, rhs, lambda_);
  FeatureMapStack out(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) out[k] = fft_.inverse_real(y[k]);
  return out;
}

namespace {

void check_coding_state(const CodingState& s, const CodingOperator& op) {
  const auto k = op.kernel_count();
  if (s.b.size() != k || s.u.size() != k)
    throw InvalidInput("code_step: state has wrong number of maps");
  for (std::size_t i = 0; i < k; ++i)
    if (shape_of(s.b[i]) != op.shape() || shape_of(s.u[i]) != op.shape())
      throw InvalidInput("code_step: state map shape mismatch");
}

FeatureMapStack difference(const FeatureMapStack& a, const FeatureMapStack& b) {
  FeatureMapStack out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
  return out;
}

}  // namespace

CodingState code_step(const CodingState& state, const CodingOperator& op,
                      const SpectrumStack& data_term, const SolverConfig& cfg) {
  check_coding_state(state, op);
  const std::size_t k_count = op.kernel_count();
  CodingState next;
  next.e = op.solve(data_term, difference(state.b, state.u));
  next.b.resize(k_count);
  next.u.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    const Matrix u_bar = state.u[k] + next.e[k] - state.b[k];
    const Matrix b_bar = soft_threshold(Matrix(next.e[k] + u_bar), cfg.alpha);
    if (cfg.gamma == 1.0) {
      next.b[k] = b_bar;
      next.u[k] = u_bar;
    } else {
      next.b[k] = state.b[k] - cfg.gamma * (state.b[k] - b_bar);
      next.u[k] = state.u[k] - cfg.gamma * (state.u[k] - u_bar);
    }
  }
  return next;
}

CodingState code_step(const CodingState& state, const KernelBank& kernels, const SubjectBlock& x,
                      const SolverConfig& cfg) {
  const CodingOperator op(kernels, cfg.lambda);
  return code_step(state, op, op.data_term(x), cfg);
}

CodingState code_step_plain(const CodingState& state, const CodingOperator& op,
                            const SpectrumStack& data_term, const SolverConfig& cfg) {
  check_coding_state(state, op);
  CodingState next;
  next.e = op.solve(data_term, difference(state.b, state.u));
  next.b.resize(next.e.size());
  next.u.resize(next.e.size());
  for (std::size_t k = 0; k < next.e.size(); ++k) {
    next.b[k] = soft_threshold(Matrix(next.e[k] + state.u[k]), cfg.alpha);
    next.u[k] = state.u[k] + next.e[k] - next.b[k];
  }
  return next;
}

CodingResult solve_coding_detailed(const SubjectBlock& x, const CodingOperator& op,
                                   const SolverConfig& cfg) {
  const SpectrumStack data = op.data_term(x);
  CodingState state = CodingState::zeros(op.kernel_count(), op.shape());
  CodingResult result;
  for (int it = 0; it < cfg.coding_iters; ++it) {
    CodingState next = code_step(state, op, data, cfg);
    double primal = 0.0, dual = 0.0;
    for (std::size_t k = 0; k < next.b.size(); ++k) {
      primal = std::max(primal, (next.e[k] - next.b[k]).cwiseAbs().maxCoeff());
      dual = std::max(dual, (next.b[k] - state.b[k]).cwiseAbs().maxCoeff());
    }
    state = std::move(next);
    result.iterations = it + 1;
    result.residual = std::max(primal, dual);
    if (cfg.residual_tol > 0.0 && result.residual <= cfg.residual_tol) break;
  }
  result.maps = std::move(state.b);
  return result;
}

FeatureMapStack solve_coding(const SubjectBlock& x, const KernelBank& kernels,
                             const SolverConfig& cfg) {
  cfg.validate();
  const CodingOperator op(kernels, cfg.lambda);
  return solve_coding_detailed(x, op, cfg).maps;
}

// ---------------------------------------------------------------------------
// Dictionary

DictOperator::DictOperator(std::span<const FeatureMapStack> maps, std::span<const SubjectBlock> xs,
                           double lambda)
    : fft_(xs.empty() ? Shape{1, 1} : shape_of(xs.front())), lambda_(lambda) {
  if (xs.empty() || maps.size() != xs.size())
    throw InvalidInput("dict_step: need one map stack per block and M >= 1");
  const auto m_count = static_cast<Eigen::Index>(xs.size());
  const auto k_count = static_cast<Eigen::Index>(maps.front().size());
  if (k_count < 1) throw InvalidInput("dict_step: empty map stack");
  const Shape shape = fft_.shape();

  std::vector<SpectrumStack> symbols(xs.size());
  data_term_.assign(static_cast<std::size_t>(k_count), Spectrum::Zero(shape.rows, shape.cols));
  for (Eigen::Index m = 0; m < m_count; ++m) {
    const auto& stack = maps[static_cast<std::size_t>(m)];
    const auto& x = xs[static_cast<std::size_t>(m)];
    if (shape_of(x) != shape || static_cast<Eigen::Index>(stack.size()) != k_count)
      throw InvalidInput("dict_step: shape mismatch at block " + std::to_string(m));
    const Spectrum xhat = fft_.forward(x);
    for (Eigen::Index k = 0; k < k_count; ++k) {
      if (shape_of(stack[static_cast<std::size_t>(k)]) != shape)
        throw InvalidInput("dict_step: map shape mismatch at block " + std::to_string(m));
      Spectrum s = fft_.symbol(stack[static_cast<std::size_t>(k)]);
      data_term_[static_cast<std::size_t>(k)] += lambda * s.conjugate().cwiseProduct(xhat);
      symbols[static_cast<std::size_t>(m)].push_back(std::move(s));
    }
  }

  reduced_ = m_count < k_count;
  freqs_.resize(static_cast<std::size_t>(shape.size()));
  Eigen::MatrixXcd e(m_count, k_count);
  for (Eigen::Index p = 0; p < shape.size(); ++p) {
    for (Eigen::Index m = 0; m < m_count; ++m)
      for (Eigen::Index k = 0; k < k_count; ++k)
        e(m, k) = symbols[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)].data()[p];
    auto& f = freqs_[static_cast<std::size_t>(p)];
    Eigen::MatrixXcd sys = reduced_ ? Eigen::MatrixXcd(lambda * (e * e.adjoint()))
                                    : Eigen::MatrixXcd(lambda * (e.adjoint() * e));
    sys.diagonal().array() += 1.0;
    f.llt.compute(sys);
    if (f.llt.info() != Eigen::Success) throw InvalidInput("dict_step: singular frequency system");
    if (reduced_) f.e = e;
  }
}

std::vector<Matrix> DictOperator::solve(const std::vector<Matrix>& target) const {
  const std::size_t k_count = data_term_.size();
  if (target.size() != k_count) throw InvalidInput("dict_step: kernel count mismatch");
  SpectrumStack rhs(k_count);
  for (std::size_t k = 0; k < k_count; ++k) rhs[k] = data_term_[k] + fft_.forward(target[k]);

  Eigen::VectorXcd r(static_cast<Eigen::Index>(k_count));
  for (std::size_t p = 0; p < freqs_.size(); ++p) {
    const auto idx = static_cast<Eigen::Index>(p);
    for (std::size_t k = 0; k < k_count; ++k) r(static_cast<Eigen::Index>(k)) = rhs[k].data()[idx];
    const auto& f = freqs_[p];
    Eigen::VectorXcd y =
        reduced_ ? Eigen::VectorXcd(r - lambda_ * (f.e.adjoint() * f.llt.solve(f.e * r)))
                 : Eigen::VectorXcd(f.llt.solve(r));
    for (std::size_t k = 0; k < k_count; ++k) rhs[k].data()[idx] = y(static_cast<Eigen::Index>(k));
  }
  std::vector<Matrix> out(k_count);
  for (std::size_t k = 0; k < k_count; ++k) out[k] = fft_.inverse_real(rhs[k]);
  return out;
}

namespace {

void check_dict_state(const DictState& s, const DictOperator& op) {
  const auto k = op.kernel_count();
  if (s.c.size() != k || s.v.size() != k) throw InvalidInput("dict_step: state kernel count mismatch");
  for (std::size_t i = 0; i < k; ++i)
    if (shape_of(s.c[i]) != op.shape() || shape_of(s.v[i]) != op.shape())
      throw InvalidInput("dict_step: state shape mismatch");
}

}  // namespace

DictState dict_step(const DictState& state, const DictOperator& op, const SupportMask& support,
                    const SolverConfig& cfg) {
  check_dict_state(state, op);
  DictState next;
  next.d = op.solve(difference(state.c, state.v));
  next.c.resize(next.d.size());
  next.v.resize(next.d.size());
  for (std::size_t k = 0; k < next.d.size(); ++k) {
    const Matrix v_bar = state.v[k] + next.d[k] - state.c[k];
    const Matrix c_bar = project_kernel(next.d[k] + v_bar, support);
    if (cfg.gamma == 1.0) {
      next.c[k] = c_bar;
      next.v[k] = v_bar;
    } else {
      next.c[k] = state.c[k] - cfg.gamma * (state.c[k] - c_bar);
      next.v[k] = state.v[k] - cfg.gamma * (state.v[k] - v_bar);
    }
  }
  return next;
}

DictState dict_step(const DictState& state, std::span<const FeatureMapStack> maps,
                    std::span<const SubjectBlock> xs, const SupportMask& support,
                    const SolverConfig& cfg) {
  const DictOperator op(maps, xs, cfg.lambda);
  return dict_step(state, op, support, cfg);
}

DictState dict_step_plain(const DictState& state, const DictOperator& op,
                          const SupportMask& support, const SolverConfig&) {
  check_dict_state(state, op);
  DictState next;
  next.d = op.solve(difference(state.c, state.v));
  next.c.resize(next.d.size());
  next.v.resize(next.d.size());
  for (std::size_t k = 0; k < next.d.size(); ++k) {
    next.c[k] = project_kernel(next.d[k] + state.v[k], support);
    next.v[k] = state.v[k] + next.d[k] - next.c[k];
  }
  return next;
}

// ---------------------------------------------------------------------------
// Kernel learning

KernelBank initial_kernels(std::size_t k, std::pair<Eigen::Index, Eigen::Index> kernel_size,
                           Shape padded, std::uint64_t seed) {
  if (k < 1) throw InvalidInput("learn_kernels: need at least one kernel");
  const auto [k1, k2] = kernel_size;
  if (k1 < 1 || k2 < 1 || k1 > padded.rows || k2 > padded.cols)
    throw InvalidInput("learn_kernels: kernel " + std::to_string(k1) + "x" + std::to_string(k2) +
                       " does not fit block " + std::to_string(padded.rows) + "x" +
                       std::to_string(padded.cols));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Matrix> kernels;
  for (std::size_t i = 0; i < k; ++i) {
    Matrix d(k1, k2);
    for (Eigen::Index r = 0; r < k1; ++r)
      for (Eigen::Index c = 0; c < k2; ++c) d(r, c) = gauss(rng);
    d /= d.norm();
    kernels.push_back(std::move(d));
  }
  return {std::move(kernels), padded};
}

namespace {

KernelBank bank_from_padded(const std::vector<Matrix>& padded, const SupportMask& support) {
  std::vector<Matrix> kernels;
  kernels.reserve(padded.size());
  for (const auto& c : padded)
    kernels.push_back(project_kernel(c, support).topLeftCorner(support.k1(), support.k2()));
  return {std::move(kernels), support.shape()};
}

}  // namespace

KernelBank learn_kernels_from(const SourceDomain& source, KernelBank bank, const SolverConfig& cfg,
                              unsigned threads) {
  cfg.validate();
  if (source.blocks.empty()) throw InvalidInput("learn_kernels: empty source domain");
  for (const auto& x : source.blocks)
    if (shape_of(x) != bank.padded_shape())
      throw InvalidInput("learn_kernels: source blocks do not match the kernel grid");
  const SupportMask support = bank.support();
  std::vector<FeatureMapStack> maps(source.blocks.size());

  for (int outer = 0; outer < cfg.outer_iters; ++outer) {
    const CodingOperator coder(bank, cfg.lambda);
    parallel_for(source.blocks.size(), threads, [&](std::size_t m) {
      maps[m] = solve_coding_detailed(source.blocks[m], coder, cfg).maps;
    });

    const DictOperator dict(maps, source.blocks, cfg.lambda);
    DictState state = DictState::from_bank(bank);
    for (int it = 0; it < cfg.dict_iters; ++it) state = dict_step(state, dict, support, cfg);
    bank = bank_from_padded(state.c, support);
  }
  return bank;
}

KernelBank learn_kernels(const SourceDomain& source, std::size_t k,
                         std::pair<Eigen::Index, Eigen::Index> kernel_size,
                         const SolverConfig& cfg, unsigned threads) {
  if (source.blocks.empty()) throw InvalidInput("learn_kernels: empty source domain");
  const Shape shape = shape_of(source.blocks.front());
  return learn_kernels_from(source, initial_kernels(k, kernel_size, shape, cfg.seed), cfg, threads);
}

}  // namespace csk
