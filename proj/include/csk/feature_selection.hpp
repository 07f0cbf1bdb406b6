#pragma once

#include <span>
#include <vector>

#include "csk/classification.hpp"
#include "csk/csc_solver.hpp"
#include "csk/transfer.hpp"

namespace csk {

struct ReliefParams {
  std::size_t r_neighbors = 3;
  std::size_t q_features = 1;
};

struct WeightVector {
  Eigen::VectorXd weights;
  std::vector<std::size_t> order;  ///< descending weight, ties by ascending column
};

struct SelectedTable {
  Matrix rows;
  std::vector<std::size_t> column_index;  ///< original (0-based) column of each kept column
};

/// Relief weights over training rows with labels in {0, 1}.
///
/// For every row the R nearest same-class rows (hits) and R nearest other-class
/// rows (misses) are found by Euclidean distance over all columns, excluding the
/// row itself, ties broken by ascending row index. Feature j accumulates
/// -(x_ij - hit_j)^2 for each hit and +(x_ij - miss_j)^2 for each miss.
/// Throws InvalidInput if a class has fewer than R + 1 rows.
WeightVector relief_weights(const Matrix& rows, std::span<const int> labels, std::size_t r);

std::vector<std::size_t> weight_order(const Eigen::VectorXd& weights);

/// The q highest-weight columns in weight order.
SelectedTable select_top_q(const Matrix& rows, const WeightVector& weights, std::size_t q);

struct SsckOptions {
  NormalizeMode normalize = NormalizeMode::train_stats;
  MapSelect map_select = MapSelect::index;
  bool global_relief = false;  ///< weights once from all rows instead of per fold
  bool skip_selection = false;  ///< ablation: keep every column
  double c = 1.0;
  unsigned threads = 1;
};

struct SsckResult {
  LosoResult loso;
  std::size_t n0 = 0;  ///< columns before selection
  std::size_t q = 0;   ///< columns reaching the SVM
};

/// Feature table -> per-fold normalize, Relief, top-Q, linear SVM, under LOSO.
SsckResult ss_ck_table(const FeatureTable& table, const ReliefParams& params,
                       const SsckOptions& options);

/// Algorithm stages after encoding: select map, reshape, then ss_ck_table.
SsckResult ss_ck_encoded(const std::vector<FeatureMapStack>& encoded, const TargetDataset& target,
                         std::size_t map_index, const ReliefParams& params,
                         const SsckOptions& options);

/// Full evaluation of a kernel bank on a labeled target.
SsckResult ss_ck(const KernelBank& kernels, const TargetDataset& target, std::size_t map_index,
                 const ReliefParams& params, const SolverConfig& cfg, const SsckOptions& options);

}  // namespace csk
