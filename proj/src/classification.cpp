#include "csk/classification.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "csk/parallel.hpp"

namespace csk {

double LinearModel::decision(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  return x.dot(weights) + bias;
}

LinearModel train_linear_svm(const Matrix& x, std::span<const int> y, double c,
                             const SvmOptions& options) {
  const Eigen::Index n = x.rows();
  const Eigen::Index dim = x.cols();
  if (static_cast<std::size_t>(n) != y.size()) throw InvalidInput("svm: label count mismatch");
  if (!(c > 0.0)) throw InvalidInput("svm: C must be positive");
  if (!x.allFinite()) throw InvalidInput("svm: non-finite feature value");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw InvalidInput("svm: labels must be -1 or +1");
  }
  if (!pos || !neg) throw InvalidInput("svm: training data has a single class");

  LinearModel model;
  model.c_param = c;
  model.weights = Eigen::VectorXd::Zero(dim);
  model.dual = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd qdiag(n);
  for (Eigen::Index i = 0; i < n; ++i) qdiag(i) = x.row(i).squaredNorm() + 1.0;

  auto& w = model.weights;
  auto& alpha = model.dual;
  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    double max_pg = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double yi = y[static_cast<std::size_t>(i)];
      const double g = yi * (x.row(i).dot(w) + model.bias) - 1.0;
      double pg = g;
      if (alpha(i) <= 0.0) pg = std::min(g, 0.0);
      else if (alpha(i) >= c) pg = std::max(g, 0.0);
      max_pg = std::max(max_pg, std::abs(pg));
      if (pg != 0.0) {
        const double old = alpha(i);
        alpha(i) = std::clamp(old - g / qdiag(i), 0.0, c);
        const double delta = (alpha(i) - old) * yi;
        w += delta * x.row(i).transpose();
        model.bias += delta;
      }
    }
    model.epochs = epoch + 1;
    if (max_pg <= options.tolerance) break;
  }
  return model;
}

double svm_dual_objective(const Matrix& x, std::span<const int> y, const Eigen::VectorXd& alpha) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
  double b = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double coef = alpha(i) * y[static_cast<std::size_t>(i)];
    w += coef * x.row(i).transpose();
    b += coef;
  }
  return 0.5 * (w.squaredNorm() + b * b) - alpha.sum();
}

std::vector<int> predict(const LinearModel& model, const Matrix& x) {
  if (x.cols() != model.weights.size()) throw InvalidInput("predict: dimension mismatch");
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    out[static_cast<std::size_t>(i)] = model.decision(x.row(i)) >= 0.0 ? 1 : -1;
  return out;
}

std::optional<double> Metrics::accuracy() const {
  if (total() == 0) return std::nullopt;
  return static_cast<double>(tp + tn) / total();
}
std::optional<double> Metrics::sensitivity() const {
  if (tp + fn == 0) return std::nullopt;
  return static_cast<double>(tp) / (tp + fn);
}
std::optional<double> Metrics::specificity() const {
  if (tn + fp == 0) return std::nullopt;
  return static_cast<double>(tn) / (tn + fp);
}

Metrics& Metrics::operator+=(const Metrics& o) {
  tp += o.tp;
  fn += o.fn;
  tn += o.tn;
  fp += o.fp;
  return *this;
}

Metrics confusion_metrics(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw InvalidInput("confusion_metrics: length mismatch");
  Metrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool actual = truth[i] == 1;
    const bool guess = predicted[i] == 1;
    if (actual && guess) ++m.tp;
    else if (actual) ++m.fn;
    else if (guess) ++m.fp;
    else ++m.tn;
  }
  return m;
}

std::size_t LosoResult::invalid_folds() const {
  return static_cast<std::size_t>(
      std::count_if(folds.begin(), folds.end(), [](const FoldRecord& f) { return !f.valid; }));
}

LosoResult loso_cv(std::span<const int> labels, std::span<const std::string> subject_ids,
                   const FoldPredictor& predictor, unsigned threads) {
  const std::size_t m = labels.size();
  if (subject_ids.size() != m) throw InvalidInput("loso_cv: labels and subject ids must align");
  if (m < 2) throw InvalidInput("loso_cv: need at least two subjects");
  if (std::set<int>(labels.begin(), labels.end()).size() < 2)
    throw InvalidInput("loso_cv: both classes must be present");

  LosoResult result;
  result.folds.resize(m);
  parallel_for(m, threads, [&](std::size_t held) {
    FoldRecord& fold = result.folds[held];
    fold.held_out = held;
    fold.subject_id = subject_ids[held];
    fold.truth = labels[held];
    std::vector<std::size_t> train;
    std::set<int> classes;
    for (std::size_t i = 0; i < m; ++i) {
      if (subject_ids[i] == subject_ids[held]) continue;
      train.push_back(i);
      fold.train_ids.push_back(subject_ids[i]);
      classes.insert(labels[i]);
    }
    if (classes.size() < 2) {
      fold.valid = false;
      fold.reason = "training split has a single class";
      return;
    }
    try {
      fold.prediction = predictor(train, held);
    } catch (const DegenerateFold& e) {
      fold.valid = false;
      fold.reason = e.what();
    }
  });

  for (const auto& fold : result.folds) {
    if (!fold.valid) continue;
    const int p[] = {fold.prediction};
    const int t[] = {fold.truth};
    result.metrics += confusion_metrics(p, t);
  }
  return result;
}

LosoResult loso_cv(const Matrix& rows, std::span<const int> labels,
                   std::span<const std::string> subject_ids, double c, unsigned threads) {
  auto predictor = [&](std::span<const std::size_t> train, std::size_t held) {
    Matrix x(static_cast<Eigen::Index>(train.size()), rows.cols());
    std::vector<int> y;
    for (std::size_t i = 0; i < train.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = rows.row(static_cast<Eigen::Index>(train[i]));
      y.push_back(labels[train[i]] == 1 ? 1 : -1);
    }
    const LinearModel model = train_linear_svm(x, y, c);
    return model.decision(rows.row(static_cast<Eigen::Index>(held))) >= 0.0 ? 1 : 0;
  };
  return loso_cv(labels, subject_ids, predictor, threads);
}

}  // namespace csk
