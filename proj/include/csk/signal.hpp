#pragma once

#include <cstddef>
#include <vector>

#include "csk/types.hpp"

namespace csk {

struct RawSignal {
  std::vector<double> samples;
  int sample_rate = 16000;
};

struct NoiseSpec {
  RawSignal noise;
  double snr_db = 0.0;
};

/// Unlabeled source-domain blocks, all h0 x n.
struct SourceDomain {
  std::vector<SubjectBlock> blocks;
  Eigen::Index h0 = 0;
  Eigen::Index n = 0;
};

/// Mean squared amplitude.
double mean_power(const std::vector<double>& x);

/// Gain applied to `noise` (after tiling to `signal_length`) so that the
/// whole-signal SNR of the mix is `snr_db`.
double snr_gain(const RawSignal& signal, const RawSignal& noise, double snr_db);

/// Noise tiled cyclically (or truncated) to `length` samples.
std::vector<double> tile_to_length(const std::vector<double>& noise, std::size_t length);

/// signal + g * tiled(noise), with g chosen by snr_gain().
RawSignal mix_noise_at_snr(const RawSignal& signal, const RawSignal& noise, double snr_db);

/// Every signal mixed with every noise spec, signal-major.
std::vector<RawSignal> expand_dataset(const std::vector<RawSignal>& signals,
                                      const std::vector<NoiseSpec>& noise_bank);

inline constexpr std::size_t kToyFrameLength = 256;
inline constexpr std::size_t kToyFrameHop = 128;
inline constexpr std::size_t kToyBands = 8;

/// Frame-statistic stand-in for a real speech feature extractor.
///
/// Base features: mean and variance of per-frame energy, whole-signal
/// zero-crossing rate, then kToyBands mean band energies from per-frame DFTs.
/// The base vector is cycled or truncated to `n_features`.
std::vector<double> extract_toy_features(const RawSignal& signal, std::size_t n_features);

/// Consecutive groups of h0 rows become blocks; a short trailing group is dropped.
SourceDomain build_source_domain(const std::vector<std::vector<double>>& rows, Eigen::Index h0);

}  // namespace csk
