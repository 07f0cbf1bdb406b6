#include "csk/signal.hpp"

#include <cmath>
#include <string>

#include "csk/error.hpp"
#include "csk/fft.hpp"

namespace csk {

double mean_power(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

std::vector<double> tile_to_length(const std::vector<double>& noise, std::size_t length) {
  if (noise.empty()) throw InvalidInput("tile_to_length: empty noise");
  std::vector<double> out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = noise[i % noise.size()];
  return out;
}

double snr_gain(const RawSignal& signal, const RawSignal& noise, double snr_db) {
  if (signal.samples.empty()) throw InvalidInput("mix_noise_at_snr: empty signal");
  if (noise.samples.empty()) throw InvalidInput("mix_noise_at_snr: empty noise");
  if (!std::isfinite(snr_db)) throw InvalidInput("mix_noise_at_snr: SNR must be finite");
  const double ps = mean_power(signal.samples);
  const double pn = mean_power(tile_to_length(noise.samples, signal.samples.size()));
  if (!(ps > 0.0)) throw InvalidInput("mix_noise_at_snr: signal has zero power");
  if (!(pn > 0.0)) throw InvalidInput("mix_noise_at_snr: noise has zero power");
  return std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));
}

RawSignal mix_noise_at_snr(const RawSignal& signal, const RawSignal& noise, double snr_db) {
  const double g = snr_gain(signal, noise, snr_db);
  auto tiled = tile_to_length(noise.samples, signal.samples.size());
  RawSignal out{signal.samples, signal.sample_rate};
  for (std::size_t i = 0; i < tiled.size(); ++i) out.samples[i] += g * tiled[i];
  return out;
}

std::vector<RawSignal> expand_dataset(const std::vector<RawSignal>& signals,
                                      const std::vector<NoiseSpec>& noise_bank) {
  if (noise_bank.empty()) throw InvalidInput("expand_dataset: empty noise bank");
  std::vector<RawSignal> out;
  out.reserve(signals.size() * noise_bank.size());
  for (const auto& s : signals)
    for (const auto& spec : noise_bank) out.push_back(mix_noise_at_snr(s, spec.noise, spec.snr_db));
  return out;
}

std::vector<double> extract_toy_features(const RawSignal& signal, std::size_t n_features) {
  if (n_features < 1) throw InvalidInput("extract_toy_features: n_features must be >= 1");
  const auto& x = signal.samples;
  if (x.size() < kToyFrameLength)
    throw InvalidInput("extract_toy_features: signal shorter than one frame (" +
                       std::to_string(kToyFrameLength) + " samples)");

  const std::size_t frames = 1 + (x.size() - kToyFrameLength) / kToyFrameHop;
  const Fft2d fft({1, static_cast<Eigen::Index>(kToyFrameLength)});
  const std::size_t half = kToyFrameLength / 2;
  const std::size_t bins_per_band = half / kToyBands;

  std::vector<double> energy(frames);
  std::vector<double> bands(kToyBands, 0.0);
  Matrix frame(1, static_cast<Eigen::Index>(kToyFrameLength));
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t start = f * kToyFrameHop;
    double e = 0.0;
    for (std::size_t i = 0; i < kToyFrameLength; ++i) {
      frame(0, static_cast<Eigen::Index>(i)) = x[start + i];
      e += x[start + i] * x[start + i];
    }
    energy[f] = e / static_cast<double>(kToyFrameLength);
    const Spectrum spec = fft.forward(frame);
    for (std::size_t b = 0; b < kToyBands; ++b) {
      double acc = 0.0;
      for (std::size_t k = 1 + b * bins_per_band; k < 1 + (b + 1) * bins_per_band; ++k)
        acc += std::norm(spec(0, static_cast<Eigen::Index>(k)));
      bands[b] += acc / static_cast<double>(bins_per_band);
    }
  }

  double mean = 0.0;
  for (double e : energy) mean += e;
  mean /= static_cast<double>(frames);
  double var = 0.0;
  for (double e : energy) var += (e - mean) * (e - mean);
  var /= static_cast<double>(frames);

  std::size_t crossings = 0;
  for (std::size_t i = 1; i < x.size(); ++i)
    if ((x[i] >= 0.0) != (x[i - 1] >= 0.0)) ++crossings;
  const double zcr = static_cast<double>(crossings) / static_cast<double>(x.size() - 1);

  std::vector<double> base{mean, var, zcr};
  for (double b : bands) base.push_back(b / static_cast<double>(frames));

  std::vector<double> out(n_features);
  for (std::size_t i = 0; i < n_features; ++i) out[i] = base[i % base.size()];
  return out;
}

SourceDomain build_source_domain(const std::vector<std::vector<double>>& rows, Eigen::Index h0) {
  if (h0 < 1) throw InvalidInput("build_source_domain: h0 must be >= 1");
  SourceDomain domain;
  domain.h0 = h0;
  if (rows.empty()) return domain;
  const auto n = rows.front().size();
  if (n == 0) throw InvalidInput("build_source_domain: empty feature rows");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != n)
      throw InvalidInput("build_source_domain: row " + std::to_string(r) + " has " +
                         std::to_string(rows[r].size()) + " values, expected " + std::to_string(n));
    for (double v : rows[r])
      if (!std::isfinite(v))
        throw InvalidInput("build_source_domain: non-finite value in row " + std::to_string(r));
  }
  domain.n = static_cast<Eigen::Index>(n);
  const std::size_t count = rows.size() / static_cast<std::size_t>(h0);
  for (std::size_t b = 0; b < count; ++b) {
    SubjectBlock block(h0, domain.n);
    for (Eigen::Index i = 0; i < h0; ++i)
      for (Eigen::Index j = 0; j < domain.n; ++j)
        block(i, j) = rows[b * static_cast<std::size_t>(h0) + static_cast<std::size_t>(i)]
                          [static_cast<std::size_t>(j)];
    domain.blocks.push_back(std::move(block));
  }
  return domain;
}

}  // namespace csk
