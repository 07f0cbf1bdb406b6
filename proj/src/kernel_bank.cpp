#include "csk/kernel_bank.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "csk/error.hpp"

namespace csk {

KernelBank::KernelBank(std::vector<Matrix> kernels, Shape padded_shape)
    : kernels_(std::move(kernels)), padded_(padded_shape) {
  if (kernels_.empty()) throw InvalidInput("KernelBank: need at least one kernel");
  const Eigen::Index k1 = kernels_.front().rows();
  const Eigen::Index k2 = kernels_.front().cols();
  if (k1 < 1 || k2 < 1) throw InvalidInput("KernelBank: empty kernel support");
  if (k1 > padded_.rows || k2 > padded_.cols)
    throw InvalidInput("KernelBank: kernel " + std::to_string(k1) + "x" + std::to_string(k2) +
                       " larger than block " + std::to_string(padded_.rows) + "x" +
                       std::to_string(padded_.cols));
  for (std::size_t k = 0; k < kernels_.size(); ++k) {
    const auto& d = kernels_[k];
    if (d.rows() != k1 || d.cols() != k2)
      throw InvalidInput("KernelBank: kernel " + std::to_string(k) + " has a different support");
    if (!d.allFinite()) throw InvalidInput("KernelBank: non-finite kernel entry");
    if (d.norm() > 1.0 + kNormTolerance)
      throw InvalidInput("KernelBank: kernel " + std::to_string(k) + " exceeds the unit ball");
  }
}

std::uint64_t KernelBank::checksum() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  mix(&padded_.rows, sizeof padded_.rows);
  mix(&padded_.cols, sizeof padded_.cols);
  for (const auto& d : kernels_) mix(d.data(), sizeof(double) * static_cast<std::size_t>(d.size()));
  return h;
}

bool operator==(const KernelBank& a, const KernelBank& b) {
  if (a.padded_ != b.padded_ || a.kernels_.size() != b.kernels_.size()) return false;
  for (std::size_t k = 0; k < a.kernels_.size(); ++k) {
    const auto& x = a.kernels_[k];
    const auto& y = b.kernels_[k];
    if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
    if (std::memcmp(x.data(), y.data(), sizeof(double) * static_cast<std::size_t>(x.size())) != 0)
      return false;
  }
  return true;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "kernel bank container is little-endian; add byte swapping for this target");

std::filesystem::path header_path(const std::filesystem::path& bin_path) {
  return std::filesystem::path(bin_path.string() + ".json");
}

}  // namespace

void save_kernel_bank(const std::filesystem::path& bin_path, const KernelBank& bank,
                      std::uint64_t seed, const nlohmann::json& config) {
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw DataError(bin_path.string() + ": cannot open for writing");
  for (const auto& d : bank.kernels())
    bin.write(reinterpret_cast<const char*>(d.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(d.size())));
  if (!bin) throw DataError(bin_path.string() + ": write failed");

  nlohmann::json header{
      {"format", "csk-kernel-bank"},
      {"version", 1},
      {"dtype", "float64-le"},
      {"payload", bin_path.filename().string()},
      {"K", bank.size()},
      {"k1", bank.k1()},
      {"k2", bank.k2()},
      {"H0", bank.padded_shape().rows},
      {"N", bank.padded_shape().cols},
      {"seed", seed},
      {"checksum", bank.checksum()},
      {"config", config},
  };
  std::ofstream js(header_path(bin_path));
  if (!js) throw DataError(header_path(bin_path).string() + ": cannot open for writing");
  js << header.dump(2) << '\n';
}

LoadedKernelBank load_kernel_bank(const std::filesystem::path& bin_path) {
  const auto hpath = header_path(bin_path);
  std::ifstream js(hpath);
  if (!js) throw DataError(hpath.string() + ": cannot open");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(js);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(hpath.string() + ": " + e.what());
  }
  std::size_t count = 0;
  Eigen::Index k1 = 0, k2 = 0, h0 = 0, n = 0;
  std::uint64_t seed = 0;
  try {
    if (header.at("format") != "csk-kernel-bank") throw DataError(hpath.string() + ": wrong format tag");
    count = header.at("K").get<std::size_t>();
    k1 = header.at("k1").get<Eigen::Index>();
    k2 = header.at("k2").get<Eigen::Index>();
    h0 = header.at("H0").get<Eigen::Index>();
    n = header.at("N").get<Eigen::Index>();
    seed = header.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(hpath.string() + ": " + e.what());
  }
  if (count < 1 || k1 < 1 || k2 < 1) throw DataError(hpath.string() + ": invalid dimensions");

  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw DataError(bin_path.string() + ": cannot open");
  std::vector<Matrix> kernels;
  for (std::size_t k = 0; k < count; ++k) {
    Matrix d(k1, k2);
    bin.read(reinterpret_cast<char*>(d.data()),
             static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(d.size())));
    if (!bin) throw DataError(bin_path.string() + ": payload shorter than header declares");
    kernels.push_back(std::move(d));
  }
  if (bin.peek() != std::char_traits<char>::eof())
    throw DataError(bin_path.string() + ": payload longer than header declares");

  try {
    KernelBank bank(std::move(kernels), {h0, n});
    if (header.contains("checksum") && header["checksum"].get<std::uint64_t>() != bank.checksum())
      throw DataError(bin_path.string() + ": checksum mismatch");
    return {std::move(bank), seed, header.value("config", nlohmann::json::object())};
  } catch (const InvalidInput& e) {
    throw DataError(bin_path.string() + ": " + e.what());
  }
}

}  // namespace csk
