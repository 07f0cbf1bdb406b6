#pragma once

#include <span>
#include <string>
#include <vector>

#include "csk/csc_solver.hpp"
#include "csk/kernel_bank.hpp"
#include "csk/types.hpp"

namespace csk {

/// Class label of the patient group; the other class is 0.
inline constexpr int kPositiveLabel = 1;

/// Labeled target domain: one H0 x N block per subject.
struct TargetDataset {
  std::vector<SubjectBlock> blocks;
  std::vector<int> labels;  ///< 0 or 1
  std::vector<std::string> subject_ids;

  std::size_t size() const { return blocks.size(); }
  Shape block_shape() const { return blocks.empty() ? Shape{} : shape_of(blocks.front()); }
  /// Throws InvalidInput on misaligned fields, ragged blocks or bad labels.
  void validate() const;
  TargetDataset subset(std::span<const std::size_t> indices) const;
};

enum class NormalizeMode { train_stats, all_rows };
enum class MapSelect { index, concat };

/// One reshaped row per subject.
struct FeatureTable {
  Matrix rows;
  std::vector<int> labels;
  std::vector<std::string> subject_ids;
  std::vector<bool> is_train;  ///< all true unless a split is applied
};

/// Standardizes the whole block to zero mean and unit variance. Constant blocks
/// (variance below 1e-12) become all zeros.
SubjectBlock local_normalize_block(const SubjectBlock& block);

/// Locally normalizes and codes every subject against a fixed bank.
std::vector<FeatureMapStack> encode_target(const TargetDataset& target, const KernelBank& kernels,
                                           const SolverConfig& cfg, unsigned threads = 1);

/// The index-th map, 1-based.
Matrix select_feature_map(const FeatureMapStack& stack, std::size_t index);

/// index mode: select_feature_map. concat mode: the first `index` maps side by
/// side (H0 x index*N).
Matrix select_maps(const FeatureMapStack& stack, std::size_t index, MapSelect mode);

/// Row-major flatten of each matrix into one row.
Matrix reshape_expand(std::span<const Matrix> selected);
Matrix unflatten_row(const Eigen::Ref<const Eigen::RowVectorXd>& row, Shape shape);

/// Feature table from encoded maps; no split, no normalization.
FeatureTable build_feature_table(const std::vector<FeatureMapStack>& encoded,
                                 const TargetDataset& target, std::size_t map_index,
                                 MapSelect mode = MapSelect::index);

/// Per-column min-max scaling parameters.
struct MinMaxScaler {
  Eigen::RowVectorXd low;
  Eigen::RowVectorXd range;  ///< 0 for constant columns

  /// Fits on the given rows of `m`. Throws InvalidInput when `rows` is empty.
  static MinMaxScaler fit(const Matrix& m, std::span<const std::size_t> rows);
  /// (x - low) / range, unclipped; constant columns map to 0.
  Matrix apply(const Matrix& m) const;
};

/// Min-max normalization with statistics from the training rows (train_stats)
/// or every row (all_rows).
FeatureTable normalize_table(const FeatureTable& table, NormalizeMode mode);

}  // namespace csk
