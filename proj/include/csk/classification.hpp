#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csk/error.hpp"
#include "csk/types.hpp"

namespace csk {

/// Soft-margin linear SVM f(x) = w.x + b. The bias is learned as the weight of a
/// constant feature of value 1, so it is regularized together with w.
struct LinearModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double c_param = 1.0;
  Eigen::VectorXd dual;  ///< one coefficient per training row, in [0, C]
  int epochs = 0;

  double decision(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

struct SvmOptions {
  double tolerance = 1e-6;  ///< on the max projected-gradient magnitude
  int max_epochs = 10000;
};

/// Dual coordinate descent in fixed row order; bitwise deterministic.
/// `y` holds -1/+1. Throws InvalidInput for single-class or non-finite input.
LinearModel train_linear_svm(const Matrix& x, std::span<const int> y, double c,
                             const SvmOptions& options = {});

/// 1/2 a^T Q a - sum(a) with Q_ij = y_i y_j (x_i.x_j + 1).
double svm_dual_objective(const Matrix& x, std::span<const int> y, const Eigen::VectorXd& alpha);

/// sign(w.x + b) with sign(0) = +1.
std::vector<int> predict(const LinearModel& model, const Matrix& x);

/// Confusion counts with label 1 as the positive class. Rates whose
/// denominator is zero are empty.
struct Metrics {
  int tp = 0, fn = 0, tn = 0, fp = 0;

  int total() const { return tp + fn + tn + fp; }
  std::optional<double> accuracy() const;
  std::optional<double> sensitivity() const;
  std::optional<double> specificity() const;

  Metrics& operator+=(const Metrics& o);
  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Labels in {0, 1}.
Metrics confusion_metrics(std::span<const int> predicted, std::span<const int> truth);

/// Thrown by a fold predictor when its training split cannot be fitted.
class DegenerateFold : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

struct FoldRecord {
  std::size_t held_out = 0;
  std::string subject_id;
  std::vector<std::string> train_ids;
  int truth = 0;
  int prediction = 0;
  bool valid = true;
  std::string reason;  ///< why the fold is invalid
};

struct LosoResult {
  Metrics metrics;  ///< summed over valid folds
  std::vector<FoldRecord> folds;
  std::size_t invalid_folds() const;
};

/// Predicts the held-out row (label 0/1) from the training rows.
using FoldPredictor =
    std::function<int(std::span<const std::size_t> train, std::size_t held_out)>;

/// Leave-one-subject-out: one fold per row. A fold whose training labels are
/// single-class, or whose predictor throws DegenerateFold, is recorded as
/// invalid and left out of the metrics.
LosoResult loso_cv(std::span<const int> labels, std::span<const std::string> subject_ids,
                   const FoldPredictor& predictor, unsigned threads = 1);

/// LOSO with a linear SVM on fixed rows.
LosoResult loso_cv(const Matrix& rows, std::span<const int> labels,
                   std::span<const std::string> subject_ids, double c, unsigned threads = 1);

}  // namespace csk
