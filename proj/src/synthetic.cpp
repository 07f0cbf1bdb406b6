#include "csk/synthetic.hpp"

#include <random>

#include "csk/csc_ops.hpp"

namespace csk {

SubjectBlock planted_block(const PlantedSpec& spec, const Matrix& kernel, int cls,
                           std::mt19937_64& rng) {
  std::bernoulli_distribution active(spec.activation_prob);
  std::uniform_real_distribution<double> amplitude(0.5, 1.5);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);
  const Eigen::Index offset = cls == 1 ? 1 : spec.column_period / 2 + 1;
  Matrix map = Matrix::Zero(spec.h0, spec.n);
  for (Eigen::Index r = 0; r < spec.h0; ++r)
    for (Eigen::Index c = 0; c < spec.n; ++c)
      if (c % spec.column_period == offset % spec.column_period && active(rng))
        map(r, c) = amplitude(rng);
  Matrix block = conv2_circular(kernel, map);
  for (Eigen::Index i = 0; i < block.size(); ++i) block.data()[i] += noise(rng);
  return block;
}

PlantedData make_planted(const PlantedSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw_kernel = [&] {
    Matrix k(spec.kernel_rows, spec.kernel_cols);
    for (Eigen::Index i = 0; i < k.size(); ++i) k.data()[i] = gauss(rng);
    return Matrix(k / k.norm());
  };
  PlantedData data;
  data.kernel_a = draw_kernel();
  data.kernel_b = draw_kernel();

  for (std::size_t s = 0; s < spec.subjects; ++s) {
    const int cls = s % 2 == 0 ? 1 : 0;
    data.target.blocks.push_back(
        planted_block(spec, cls == 1 ? data.kernel_a : data.kernel_b, cls, rng));
    data.target.labels.push_back(cls);
    data.target.subject_ids.push_back((cls == 1 ? "pd" : "hc") + std::to_string(s / 2 + 1));
  }
  data.source.h0 = spec.h0;
  data.source.n = spec.n;
  for (std::size_t b = 0; b < spec.source_blocks; ++b) {
    const int cls = b % 2 == 0 ? 1 : 0;
    data.source.blocks.push_back(
        planted_block(spec, cls == 1 ? data.kernel_a : data.kernel_b, cls, rng));
  }
  return data;
}

}  // namespace csk
