#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "csk/kernel_search.hpp"

namespace csk {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Everything a run needs. Keys of the flat config file and the CLI long flags
/// share the names listed by RunConfig::keys().
struct RunConfig {
  Variant variant = Variant::cstlok_s2;

  std::string source;      ///< source feature CSV
  std::string source_wav;  ///< directory of source WAV signals (when no CSV)
  std::string noise_wav;   ///< directory of noise WAVs mixed into source_wav
  std::vector<double> snr_db{0.0};
  std::string target;      ///< target CSV
  std::string out = "out";

  SolverConfig solver;
  std::uint64_t seed = 1;
  Eigen::Index kernel_rows = 8;
  Eigen::Index kernel_cols = 8;
  std::size_t kernel_count = 8;
  std::size_t map_index = 1;
  std::size_t q = 0;  ///< 0: ceil(N0 / 4)

  std::vector<std::size_t> kernel_counts{2, 3, 4, 5, 6, 7, 8};
  std::size_t n_seeds = 10;
  std::optional<std::vector<std::uint64_t>> seeds;  ///< default: seed, seed+1, ...
  std::vector<std::size_t> q_grid;                  ///< empty: default grid
  double split_ratio = 0.5;
  std::optional<std::uint64_t> split_seed;          ///< default: seed

  std::size_t r_neighbors = 3;
  NormalizeMode normalize = NormalizeMode::train_stats;
  MapSelect map_select = MapSelect::index;
  bool global_relief = false;
  bool ablate_selection = false;
  double c = 1.0;
  bool literal_a1 = false;
  unsigned threads = 0;  ///< 0: hardware concurrency

  static const std::vector<std::string>& keys();

  /// Parses and stores one value. Throws ConfigError for unknown keys or
  /// malformed values.
  void set(const std::string& key, const std::string& value);

  /// Every key except the run-local ones (out, threads), in keys() order.
  KeyValues to_kv() const;

  /// Range checks; ConfigError on failure.
  void validate() const;

  std::vector<std::uint64_t> effective_seeds() const;
  unsigned effective_threads() const;
  PipelineConfig pipeline() const;
};

/// `key = value` lines; blank lines and lines starting with '#' are skipped.
KeyValues read_config_file(const std::filesystem::path& path);
void write_config_file(const std::filesystem::path& path, const KeyValues& kv);

/// Applies `file` then `flags` on top of the defaults.
RunConfig make_run_config(const KeyValues& file, const KeyValues& flags);

std::string to_string(NormalizeMode mode);
std::string to_string(MapSelect mode);

}  // namespace csk
