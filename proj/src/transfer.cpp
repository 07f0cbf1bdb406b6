#include "csk/transfer.hpp"

#include <cmath>

#include "csk/error.hpp"
#include "csk/parallel.hpp"

namespace csk {

void TargetDataset::validate() const {
  if (blocks.size() != labels.size() || blocks.size() != subject_ids.size())
    throw InvalidInput("target: blocks, labels and subject ids must align");
  if (blocks.empty()) return;
  const Shape shape = block_shape();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (shape_of(blocks[i]) != shape)
      throw InvalidInput("target: subject " + subject_ids[i] + " has a different block shape");
    if (labels[i] != 0 && labels[i] != 1)
      throw InvalidInput("target: subject " + subject_ids[i] + " has label outside {0,1}");
  }
}

TargetDataset TargetDataset::subset(std::span<const std::size_t> indices) const {
  TargetDataset out;
  for (auto i : indices) {
    out.blocks.push_back(blocks.at(i));
    out.labels.push_back(labels.at(i));
    out.subject_ids.push_back(subject_ids.at(i));
  }
  return out;
}

SubjectBlock local_normalize_block(const SubjectBlock& block) {
  if (block.size() == 0) return block;
  const double mean = block.mean();
  const Matrix centered = block.array() - mean;
  const double var = centered.squaredNorm() / static_cast<double>(block.size());
  if (var < 1e-12) return Matrix::Zero(block.rows(), block.cols());
  return centered / std::sqrt(var);
}

std::vector<FeatureMapStack> encode_target(const TargetDataset& target, const KernelBank& kernels,
                                           const SolverConfig& cfg, unsigned threads) {
  target.validate();
  cfg.validate();
  if (target.size() > 0 && target.block_shape() != kernels.padded_shape())
    throw InvalidInput("encode_target: target blocks do not match the kernel grid");
  const CodingOperator op(kernels, cfg.lambda);
  std::vector<FeatureMapStack> out(target.size());
  parallel_for(target.size(), threads, [&](std::size_t i) {
    out[i] = solve_coding_detailed(local_normalize_block(target.blocks[i]), op, cfg).maps;
  });
  return out;
}

Matrix select_feature_map(const FeatureMapStack& stack, std::size_t index) {
  if (index < 1 || index > stack.size())
    throw InvalidInput("select_feature_map: index " + std::to_string(index) + " outside 1.." +
                       std::to_string(stack.size()));
  return stack[index - 1];
}

Matrix select_maps(const FeatureMapStack& stack, std::size_t index, MapSelect mode) {
  if (mode == MapSelect::index) return select_feature_map(stack, index);
  if (index < 1 || index > stack.size())
    throw InvalidInput("select_maps: count " + std::to_string(index) + " outside 1.." +
                       std::to_string(stack.size()));
  const auto rows = stack.front().rows();
  const auto cols = stack.front().cols();
  Matrix out(rows, cols * static_cast<Eigen::Index>(index));
  for (std::size_t k = 0; k < index; ++k)
    out.middleCols(cols * static_cast<Eigen::Index>(k), cols) = stack[k];
  return out;
}

Matrix reshape_expand(std::span<const Matrix> selected) {
  if (selected.empty()) return Matrix(0, 0);
  const Shape shape = shape_of(selected.front());
  Matrix out(static_cast<Eigen::Index>(selected.size()), shape.size());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    if (shape_of(selected[i]) != shape)
      throw InvalidInput("reshape_expand: subject " + std::to_string(i) + " has a different shape");
    // Matrix is row-major, so the storage order is the flattening order.
    out.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(selected[i].data(), shape.size());
  }
  return out;
}

Matrix unflatten_row(const Eigen::Ref<const Eigen::RowVectorXd>& row, Shape shape) {
  if (row.size() != shape.size()) throw InvalidInput("unflatten_row: size mismatch");
  Matrix out(shape.rows, shape.cols);
  for (Eigen::Index i = 0; i < row.size(); ++i) out.data()[i] = row(i);
  return out;
}

FeatureTable build_feature_table(const std::vector<FeatureMapStack>& encoded,
                                 const TargetDataset& target, std::size_t map_index,
                                 MapSelect mode) {
  if (encoded.size() != target.size())
    throw InvalidInput("build_feature_table: encoded/target size mismatch");
  std::vector<Matrix> selected;
  selected.reserve(encoded.size());
  for (const auto& stack : encoded) selected.push_back(select_maps(stack, map_index, mode));
  FeatureTable t;
  t.rows = reshape_expand(selected);
  t.labels = target.labels;
  t.subject_ids = target.subject_ids;
  t.is_train.assign(target.size(), true);
  return t;
}

MinMaxScaler MinMaxScaler::fit(const Matrix& m, std::span<const std::size_t> rows) {
  if (rows.empty()) throw InvalidInput("normalize: empty training split");
  MinMaxScaler s;
  s.low = m.row(static_cast<Eigen::Index>(rows.front()));
  Eigen::RowVectorXd high = s.low;
  for (auto r : rows) {
    s.low = s.low.cwiseMin(m.row(static_cast<Eigen::Index>(r)));
    high = high.cwiseMax(m.row(static_cast<Eigen::Index>(r)));
  }
  s.range = high - s.low;
  return s;
}

Matrix MinMaxScaler::apply(const Matrix& m) const {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (range(j) > 0.0)
      out.col(j) = (m.col(j).array() - low(j)) / range(j);
    else
      out.col(j).setZero();
  }
  return out;
}

FeatureTable normalize_table(const FeatureTable& table, NormalizeMode mode) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < static_cast<std::size_t>(table.rows.rows()); ++i)
    if (mode == NormalizeMode::all_rows || (i < table.is_train.size() && table.is_train[i]))
      rows.push_back(i);
  FeatureTable out = table;
  out.rows = MinMaxScaler::fit(table.rows, rows).apply(table.rows);
  return out;
}

}  // namespace csk
