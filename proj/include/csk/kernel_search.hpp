#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "csk/classification.hpp"
#include "csk/csc_solver.hpp"
#include "csk/feature_selection.hpp"
#include "csk/kernel_bank.hpp"
#include "csk/transfer.hpp"

namespace csk {

enum class Variant { csc_s2, cstl_s2, cstlok_s2 };

std::string to_string(Variant v);
/// Throws ConfigError for unknown names.
Variant parse_variant(const std::string& name);

struct SearchSpace {
  std::vector<std::size_t> kernel_counts{2, 3, 4, 5, 6, 7, 8};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<std::size_t> q_grid;  ///< empty: default_q_grid(N0)
  double split_ratio = 0.5;
  std::uint64_t split_seed = 1;

  void validate() const;
};

/// {ceil(N0/16), ceil(N0/8), ceil(N0/4), ceil(N0/2), N0}, ascending, without duplicates.
std::vector<std::size_t> default_q_grid(std::size_t n0);

struct TrialResult {
  std::size_t kernel_count = 0;
  std::size_t featuremap_index = 0;
  std::uint64_t seed = 0;
  std::size_t q = 0;
  Metrics a1_metrics;
  std::size_t invalid_folds = 0;
  std::string kernel_ref;  ///< "k<count>-s<seed>"
};

/// True when `a` ranks strictly above `b`: higher accuracy, then fewer kernels,
/// lower map index, lower seed, smaller Q.
bool trial_better(const TrialResult& a, const TrialResult& b);

struct KernelSplit {
  TargetDataset a1, a2;
  std::vector<std::size_t> a1_indices, a2_indices;  ///< positions in the input
};

/// Subject-level, class-stratified, seeded split. Each class puts
/// round(ratio * size) subjects in A1, clamped so both sides keep one.
KernelSplit split_kernel_sets(const TargetDataset& target, double ratio, std::uint64_t seed);

struct LearnedBank {
  std::size_t kernel_count = 0;
  std::uint64_t seed = 0;
  KernelBank bank;
};

struct SearchOptions {
  std::pair<Eigen::Index, Eigen::Index> kernel_size{8, 8};
  std::size_t r_neighbors = 3;
  SsckOptions ssck;  ///< ssck.threads is ignored; trials are the parallel unit
  unsigned threads = 1;
};

struct SearchResult {
  std::vector<TrialResult> trials;  ///< ordered by (kernel_count, seed, map index, q)
  std::size_t best = 0;             ///< index into trials
  std::vector<LearnedBank> banks;   ///< one per (kernel_count, seed)

  const TrialResult& best_trial() const { return trials.at(best); }
  const KernelBank& best_bank() const;
};

/// Learns a bank for every (kernel count, seed) from `kernel_blocks`, scores
/// every (map index, Q) with SS_CK on `a1`, and returns the exhaustive trial
/// table with its argmax.
SearchResult search_optimal_kernel(const SourceDomain& kernel_blocks, const TargetDataset& a1,
                                   const SearchSpace& space, const SolverConfig& cfg,
                                   const SearchOptions& options);

struct PipelineConfig {
  Variant variant = Variant::cstlok_s2;
  SolverConfig solver;
  SearchSpace space;
  SearchOptions search;
  std::size_t kernel_count = 8;  ///< csc_s2 / cstl_s2
  std::size_t map_index = 1;     ///< csc_s2 / cstl_s2
  std::size_t q = 0;             ///< csc_s2 / cstl_s2; 0 = ceil(N0/4)
  bool literal_a1 = false;       ///< cstlok_s2 learns kernels from A1 blocks
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct Report {
  Variant variant = Variant::cstlok_s2;
  LosoResult final_loso;
  std::size_t n0 = 0;
  std::size_t q = 0;
  std::size_t kernel_count = 0;
  std::size_t map_index = 0;
  std::uint64_t kernel_seed = 0;
  std::uint64_t kernel_checksum = 0;
  std::vector<TrialResult> trials;
  std::optional<std::size_t> selected_trial;
  std::vector<std::string> a1_ids, a2_ids;
  std::vector<StageTiming> timings;
};

/// Blocks of a target dataset, locally normalized, as an unlabeled domain.
SourceDomain blocks_as_domain(const TargetDataset& target);
/// Locally normalizes every block.
SourceDomain normalized(const SourceDomain& source);

/// Runs one of the three pipeline variants. `source` is required for
/// cstl_s2 and cstlok_s2 (ConfigError otherwise) and ignored for csc_s2.
Report run_pipeline(const PipelineConfig& config, const SourceDomain* source,
                    const TargetDataset& target);

/// Evaluation of a fixed bank on the whole target (csc_s2 / cstl_s2 after
/// their kernels are known).
Report evaluate_bank(Variant variant, const KernelBank& bank, std::uint64_t kernel_seed,
                     const PipelineConfig& config, const TargetDataset& target);

}  // namespace csk
