#pragma once

#include <cstdint>
#include <random>

#include "csk/signal.hpp"
#include "csk/transfer.hpp"

namespace csk {

/// Planted two-class data: every block is a sum of circular convolutions of a
/// class kernel with sparse maps plus Gaussian noise. Class 1 uses kernel A with
/// activations confined to one set of columns; class 0 uses kernel B on another
/// set. The source domain mixes both generators without labels.
struct PlantedSpec {
  Eigen::Index h0 = 13;
  Eigen::Index n = 26;
  Eigen::Index kernel_rows = 4;
  Eigen::Index kernel_cols = 4;
  std::size_t subjects = 20;       ///< half per class, class 1 first when odd
  std::size_t source_blocks = 40;
  double activation_prob = 0.5;    ///< per (row, active column)
  double noise_sigma = 0.05;
  Eigen::Index column_period = 8;  ///< class 1 active at c % period == 1, class 0 at period / 2 + 1
  std::uint64_t seed = 7;
};

struct PlantedData {
  Matrix kernel_a, kernel_b;  ///< unit-norm
  TargetDataset target;
  SourceDomain source;
};

PlantedData make_planted(const PlantedSpec& spec);

/// One block drawn from the class generator (1 -> kernel A, 0 -> kernel B).
SubjectBlock planted_block(const PlantedSpec& spec, const Matrix& kernel, int cls,
                           std::mt19937_64& rng);

}  // namespace csk
