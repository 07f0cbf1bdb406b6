#pragma once

#include "csk/types.hpp"

namespace csk {

/// Unitary 2-D DFT over a fixed grid.
///
/// Forward and inverse both scale by 1/sqrt(rows*cols), so the pair is an
/// isometry. Under this convention the circular convolution d * e has spectrum
/// symbol(d) .* U(e), where symbol() is the unnormalized DFT of the zero-padded
/// kernel (sqrt(rows*cols) * U(d)). Plans are shared per shape and executed
/// through the new-array interface, so an instance is safe to use from several
/// threads at once.
class Fft2d {
 public:
  explicit Fft2d(Shape shape);

  Shape shape() const { return shape_; }

  Spectrum forward(const Matrix& x) const;
  Spectrum forward(const Spectrum& x) const;
  Spectrum inverse(const Spectrum& x) const;
  /// Inverse transform keeping only the real part.
  Matrix inverse_real(const Spectrum& x) const;

  /// Operator symbol of convolution with `x`: the unnormalized DFT.
  Spectrum symbol(const Matrix& x) const;

 private:
  Shape shape_;
  void* forward_plan_;
  void* backward_plan_;
  double scale_;
};

}  // namespace csk
