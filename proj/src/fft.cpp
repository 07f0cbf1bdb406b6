#include "csk/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include <fftw3.h>

#include "csk/error.hpp"

namespace csk {
namespace {

struct PlanPair {
  fftw_plan forward;
  fftw_plan backward;
};

// The FFTW planner is not reentrant; plan execution through fftw_execute_dft is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

PlanPair plans_for(Shape shape) {
  static std::map<std::pair<Eigen::Index, Eigen::Index>, PlanPair> cache;
  std::lock_guard lock(planner_mutex());
  auto key = std::make_pair(shape.rows, shape.cols);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  auto n = static_cast<std::size_t>(shape.size());
  auto* in = fftw_alloc_complex(n);
  auto* out = fftw_alloc_complex(n);
  const int rows = static_cast<int>(shape.rows);
  const int cols = static_cast<int>(shape.cols);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p{fftw_plan_dft_2d(rows, cols, in, out, FFTW_FORWARD, flags),
             fftw_plan_dft_2d(rows, cols, in, out, FFTW_BACKWARD, flags)};
  fftw_free(in);
  fftw_free(out);
  cache.emplace(key, p);
  return p;
}

void execute(void* plan, const Spectrum& in, Spectrum& out) {
  // fftw_execute_dft does not write to its input for out-of-place plans.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(static_cast<fftw_plan>(plan), src, dst);
}

}  // namespace

Fft2d::Fft2d(Shape shape) : shape_(shape) {
  if (shape.rows < 1 || shape.cols < 1) throw InvalidInput("Fft2d: empty grid");
  auto p = plans_for(shape);
  forward_plan_ = p.forward;
  backward_plan_ = p.backward;
  scale_ = 1.0 / std::sqrt(static_cast<double>(shape.size()));
}

Spectrum Fft2d::forward(const Spectrum& x) const {
  if (Shape{x.rows(), x.cols()} != shape_) throw InvalidInput("Fft2d: shape mismatch");
  Spectrum out(shape_.rows, shape_.cols);
  execute(forward_plan_, x, out);
  out *= scale_;
  return out;
}

Spectrum Fft2d::forward(const Matrix& x) const {
  return forward(Spectrum(x.cast<std::complex<double>>()));
}

Spectrum Fft2d::inverse(const Spectrum& x) const {
  if (Shape{x.rows(), x.cols()} != shape_) throw InvalidInput("Fft2d: shape mismatch");
  Spectrum out(shape_.rows, shape_.cols);
  execute(backward_plan_, x, out);
  out *= scale_;
  return out;
}

Matrix Fft2d::inverse_real(const Spectrum& x) const { return inverse(x).real(); }

Spectrum Fft2d::symbol(const Matrix& x) const {
  return forward(x) * std::sqrt(static_cast<double>(shape_.size()));
}

}  // namespace csk
