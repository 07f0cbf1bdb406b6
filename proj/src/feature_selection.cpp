#include "csk/feature_selection.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>

#include "csk/error.hpp"

namespace csk {

std::vector<std::size_t> weight_order(const Eigen::VectorXd& weights) {
  std::vector<std::size_t> order(static_cast<std::size_t>(weights.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return weights(static_cast<Eigen::Index>(a)) > weights(static_cast<Eigen::Index>(b));
  });
  return order;
}

WeightVector relief_weights(const Matrix& rows, std::span<const int> labels, std::size_t r) {
  const auto m = static_cast<std::size_t>(rows.rows());
  if (labels.size() != m) throw InvalidInput("relief: label count mismatch");
  if (r < 1) throw InvalidInput("relief: R must be >= 1");
  std::size_t positives = 0;
  for (int l : labels) positives += l == 1 ? 1 : 0;
  const std::size_t smallest = std::min(positives, m - positives);
  if (smallest < r + 1)
    throw InvalidInput("relief: smallest class has " + std::to_string(smallest) +
                       " rows, need at least R + 1 = " + std::to_string(r + 1));

  Matrix dist2(rows.rows(), rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    dist2(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < rows.rows(); ++j)
      dist2(i, j) = dist2(j, i) = (rows.row(i) - rows.row(j)).squaredNorm();
  }

  Eigen::VectorXd w = Eigen::VectorXd::Zero(rows.cols());
  std::vector<std::pair<double, std::size_t>> hits, misses;
  for (std::size_t i = 0; i < m; ++i) {
    hits.clear();
    misses.clear();
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const double d = dist2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      (labels[j] == labels[i] ? hits : misses).emplace_back(d, j);
    }
    const auto nearest = static_cast<std::ptrdiff_t>(r);
    std::partial_sort(hits.begin(), hits.begin() + nearest, hits.end());
    std::partial_sort(misses.begin(), misses.begin() + nearest, misses.end());
    const auto xi = rows.row(static_cast<Eigen::Index>(i));
    for (std::size_t k = 0; k < r; ++k) {
      w -= (xi - rows.row(static_cast<Eigen::Index>(hits[k].second))).array().square().matrix().transpose();
      w += (xi - rows.row(static_cast<Eigen::Index>(misses[k].second))).array().square().matrix().transpose();
    }
  }
  return {w, weight_order(w)};
}

SelectedTable select_top_q(const Matrix& rows, const WeightVector& weights, std::size_t q) {
  const auto n0 = static_cast<std::size_t>(rows.cols());
  if (weights.order.size() != n0) throw InvalidInput("select_top_q: weight count mismatch");
  if (q < 1 || q > n0)
    throw InvalidInput("select_top_q: Q = " + std::to_string(q) + " outside 1.." + std::to_string(n0));
  SelectedTable out;
  out.column_index.assign(weights.order.begin(), weights.order.begin() + static_cast<std::ptrdiff_t>(q));
  out.rows.resize(rows.rows(), static_cast<Eigen::Index>(q));
  for (std::size_t c = 0; c < q; ++c)
    out.rows.col(static_cast<Eigen::Index>(c)) = rows.col(static_cast<Eigen::Index>(out.column_index[c]));
  return out;
}

namespace {

Matrix take_rows(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

}  // namespace

SsckResult ss_ck_table(const FeatureTable& table, const ReliefParams& params,
                       const SsckOptions& options) {
  const auto n0 = static_cast<std::size_t>(table.rows.cols());
  SsckResult result;
  result.n0 = n0;
  result.q = options.skip_selection ? n0 : params.q_features;
  if (result.q < 1 || result.q > n0)
    throw InvalidInput("ss_ck: Q = " + std::to_string(result.q) + " outside 1.." + std::to_string(n0));

  std::vector<std::size_t> all(table.labels.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  Matrix global_rows;
  if (options.normalize == NormalizeMode::all_rows)
    global_rows = MinMaxScaler::fit(table.rows, all).apply(table.rows);
  WeightVector global_weights;
  if (options.global_relief && !options.skip_selection) {
    const Matrix& base = options.normalize == NormalizeMode::all_rows ? global_rows : table.rows;
    global_weights = relief_weights(base, table.labels, params.r_neighbors);
  }

  auto predictor = [&](std::span<const std::size_t> train, std::size_t held) {
    Matrix normalized = options.normalize == NormalizeMode::all_rows
                            ? global_rows
                            : MinMaxScaler::fit(table.rows, train).apply(table.rows);
    std::vector<int> train_labels;
    for (auto i : train) train_labels.push_back(table.labels[i]);

    Matrix selected = normalized;
    if (!options.skip_selection) {
      WeightVector weights;
      if (options.global_relief) {
        weights = global_weights;
      } else {
        try {
          weights = relief_weights(take_rows(normalized, train), train_labels, params.r_neighbors);
        } catch (const InvalidInput& e) {
          throw DegenerateFold(e.what());
        }
      }
      selected = select_top_q(normalized, weights, result.q).rows;
    }
    std::vector<int> y;
    for (int l : train_labels) y.push_back(l == kPositiveLabel ? 1 : -1);
    const LinearModel model = train_linear_svm(take_rows(selected, train), y, options.c);
    return model.decision(selected.row(static_cast<Eigen::Index>(held))) >= 0.0 ? 1 : 0;
  };
  result.loso = loso_cv(table.labels, table.subject_ids, predictor, options.threads);
  return result;
}

SsckResult ss_ck_encoded(const std::vector<FeatureMapStack>& encoded, const TargetDataset& target,
                         std::size_t map_index, const ReliefParams& params,
                         const SsckOptions& options) {
  return ss_ck_table(build_feature_table(encoded, target, map_index, options.map_select), params,
                     options);
}

SsckResult ss_ck(const KernelBank& kernels, const TargetDataset& target, std::size_t map_index,
                 const ReliefParams& params, const SolverConfig& cfg, const SsckOptions& options) {
  return ss_ck_encoded(encode_target(target, kernels, cfg, options.threads), target, map_index,
                       params, options);
}

}  // namespace csk
