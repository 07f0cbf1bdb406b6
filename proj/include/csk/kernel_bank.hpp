#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "csk/csc_ops.hpp"
#include "csk/types.hpp"

namespace csk {

/// K convolution kernels of a common k1 x k2 support, each with 2-norm <= 1,
/// meant to be applied on a padded grid of shape padded_shape().
class KernelBank {
 public:
  static constexpr double kNormTolerance = 1e-9;

  KernelBank(std::vector<Matrix> kernels, Shape padded_shape);

  std::size_t size() const { return kernels_.size(); }
  Eigen::Index k1() const { return kernels_.front().rows(); }
  Eigen::Index k2() const { return kernels_.front().cols(); }
  Shape padded_shape() const { return padded_; }
  const std::vector<Matrix>& kernels() const { return kernels_; }
  const Matrix& kernel(std::size_t k) const { return kernels_.at(k); }

  Matrix padded(std::size_t k) const { return pad_kernel(kernels_.at(k), padded_); }
  SupportMask support() const { return {padded_, k1(), k2()}; }

  /// FNV-1a over the raw kernel bytes.
  std::uint64_t checksum() const;

  friend bool operator==(const KernelBank& a, const KernelBank& b);

 private:
  std::vector<Matrix> kernels_;
  Shape padded_;
};

/// Writes `bank` as raw little-endian float64 to `bin_path` (kernel-major, then
/// row-major within a kernel) and a JSON header next to it (`bin_path` + ".json")
/// carrying K, k1, k2, H0, N, seed and `config`.
void save_kernel_bank(const std::filesystem::path& bin_path, const KernelBank& bank,
                      std::uint64_t seed, const nlohmann::json& config);

struct LoadedKernelBank {
  KernelBank bank;
  std::uint64_t seed = 0;
  nlohmann::json config;
};

/// Inverse of save_kernel_bank. Throws DataError on a malformed container.
LoadedKernelBank load_kernel_bank(const std::filesystem::path& bin_path);

}  // namespace csk
