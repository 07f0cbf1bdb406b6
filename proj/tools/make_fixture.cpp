// Writes the planted synthetic fixture: target.csv (labeled subjects) and
// source.csv (unlabeled rows) in the given directory. With --wav, also a few
// short tone and noise recordings under wav/signals and wav/noise.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "csk/error.hpp"
#include "csk/io.hpp"
#include "csk/synthetic.hpp"
#include "csk/wav.hpp"

namespace {

void write_wav_set(const std::filesystem::path& dir, std::size_t count, std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "signals");
  fs::create_directories(dir / "noise");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  constexpr std::size_t kSamples = 4000;
  for (std::size_t s = 0; s < count; ++s) {
    csk::RawSignal tone;
    const double f = 120.0 + 40.0 * static_cast<double>(s);
    for (std::size_t i = 0; i < kSamples; ++i) {
      const double t = static_cast<double>(i) / tone.sample_rate;
      tone.samples.push_back(0.4 * std::sin(2 * std::numbers::pi * f * t) * (1.0 + 0.5 * std::sin(7.0 * t)));
    }
    csk::write_wav(dir / "signals" / ("tone" + std::to_string(s + 1) + ".wav"), tone);
  }
  csk::RawSignal noise;
  for (std::size_t i = 0; i < kSamples / 2; ++i) noise.samples.push_back(0.1 * gauss(rng));
  csk::write_wav(dir / "noise" / "white.wav", noise);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the planted two-kernel fixture"};
  std::string out = "data/fixture";
  csk::PlantedSpec spec;
  app.add_option("--out", out, "Output directory");
  app.add_option("--seed", spec.seed, "Generator seed");
  app.add_option("--subjects", spec.subjects, "Target subjects");
  app.add_option("--source-blocks", spec.source_blocks, "Unlabeled source blocks");
  app.add_option("--noise", spec.noise_sigma, "Gaussian noise sigma");
  std::size_t wav_count = 0;
  app.add_option("--wav", wav_count, "Also write this many tone recordings and one noise recording");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    std::filesystem::create_directories(out);
    const csk::PlantedData data = csk::make_planted(spec);
    csk::write_target_csv(std::filesystem::path(out) / "target.csv", data.target);
    csk::write_source_features(std::filesystem::path(out) / "source.csv", data.source);
    if (wav_count > 0) write_wav_set(std::filesystem::path(out) / "wav", wav_count, spec.seed);
  } catch (const csk::Error& e) {
    std::cerr << "make_fixture: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
