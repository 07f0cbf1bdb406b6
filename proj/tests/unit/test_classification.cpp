#include <doctest.h>

#include <random>

#include "csk/classification.hpp"
#include "csk/error.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using csk::Matrix;

TEST_CASE("svm: symmetric separable pair") {
  Matrix x(2, 1);
  x << -1.0, 1.0;
  const std::vector<int> y{-1, 1};
  const auto model = csk::train_linear_svm(x, y, 10.0);
  CHECK(std::abs(model.bias) < 1e-9);
  Matrix probe(1, 1);
  probe << 0.0;
  CHECK(model.decision(probe.row(0)) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(csk::predict(model, x) == y);
}

TEST_CASE("svm: separable toy set with large C trains to 100%") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 0.3);
  Matrix x(20, 2);
  std::vector<int> y(20);
  for (Eigen::Index i = 0; i < 20; ++i) {
    const int cls = i % 2 ? 1 : -1;
    x(i, 0) = 2.0 * cls + g(rng);
    x(i, 1) = g(rng);
    y[static_cast<std::size_t>(i)] = cls;
  }
  const auto model = csk::train_linear_svm(x, y, 100.0);
  CHECK(csk::predict(model, x) == y);
}

TEST_CASE("svm: dual objective matches the exhaustive QP") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int t = 0; t < 10; ++t) {
    Matrix x = testing::random_matrix(rng, 6, 2);
    std::vector<int> y(6);
    for (auto& v : y) v = coin(rng) ? 1 : -1;
    y[0] = 1;
    y[1] = -1;
    const double c = 0.5 + t;
    const auto model = csk::train_linear_svm(x, y, c);
    const double got = csk::svm_dual_objective(x, y, model.dual);
    CHECK(std::abs(got - oracle::svm_dual_brute(x, y, c)) <= 1e-4);
    for (Eigen::Index i = 0; i < 6; ++i) {
      CHECK(model.dual(i) >= 0.0);
      CHECK(model.dual(i) <= c);
    }
  }
}

TEST_CASE("svm: errors and determinism") {
  Matrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  CHECK_THROWS_AS(csk::train_linear_svm(x, std::vector<int>{1, 1, 1}, 1.0), csk::InvalidInput);
  CHECK_THROWS_AS(csk::train_linear_svm(x, std::vector<int>{1, 0, -1}, 1.0), csk::InvalidInput);
  const std::vector<int> y{1, -1, 1};
  const auto a = csk::train_linear_svm(x, y, 1.0);
  const auto b = csk::train_linear_svm(x, y, 1.0);
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);
  CHECK(a.dual == b.dual);
}

TEST_CASE("predict: boundary maps to +1, train accuracy consistent") {
  csk::LinearModel m;
  m.weights = Eigen::VectorXd::Zero(2);
  m.weights(0) = 1.0;
  Matrix x(2, 2);
  x << 0.0, 3.0, 2.0, 0.0;
  CHECK(csk::predict(m, x) == std::vector<int>{1, 1});
  m.bias = -1.0;
  CHECK(csk::predict(m, x) == std::vector<int>{-1, 1});
}

TEST_CASE("metrics: definitions and undefined rates") {
  const std::vector<int> truth{1, 1, 1, 1}, pred{1, 0, 1, 0};
  const auto m = csk::confusion_metrics(pred, truth);
  CHECK(*m.sensitivity() == 0.5);
  CHECK(!m.specificity().has_value());
  CHECK(*m.accuracy() == 0.5);

  csk::Metrics paper{9, 1, 10, 0};
  CHECK(*paper.accuracy() == doctest::Approx(0.95));
  CHECK(*paper.sensitivity() == doctest::Approx(0.90));
  CHECK(*paper.specificity() == doctest::Approx(1.00));
  CHECK(*csk::confusion_metrics(truth, truth).accuracy() == 1.0);
}

TEST_CASE("loso_cv: one fold per subject, oracle predictor, audit") {
  const std::vector<int> labels{1, 0, 1, 0, 1, 0};
  const std::vector<std::string> ids{"a", "b", "c", "d", "e", "f"};
  const auto r = csk::loso_cv(labels, ids, [&](std::span<const std::size_t> train, std::size_t held) {
    for (auto t : train) CHECK(t != held);
    return labels[held];
  });
  CHECK(r.folds.size() == 6);
  CHECK(*r.metrics.accuracy() == 1.0);
  for (const auto& f : r.folds)
    CHECK(std::find(f.train_ids.begin(), f.train_ids.end(), f.subject_id) == f.train_ids.end());
}

TEST_CASE("loso_cv: degenerate folds are recorded, not counted") {
  const std::vector<int> labels{1, 0, 0, 0};
  const std::vector<std::string> ids{"a", "b", "c", "d"};
  const auto r = csk::loso_cv(labels, ids, [&](std::span<const std::size_t>, std::size_t held) {
    if (held == 2) throw csk::DegenerateFold("no fit");
    return 0;
  });
  CHECK(r.invalid_folds() == 2);  // fold "a" leaves a single class, fold "c" throws
  CHECK(!r.folds[0].valid);
  CHECK(r.folds[2].reason == "no fit");
  CHECK(r.metrics.total() == 2);
}

TEST_CASE("loso_cv on rows: threads do not change results") {
  std::mt19937_64 rng(12);
  const Matrix x = testing::random_matrix(rng, 14, 3);
  std::vector<int> labels;
  std::vector<std::string> ids;
  for (int i = 0; i < 14; ++i) {
    labels.push_back(i % 2);
    ids.push_back("s" + std::to_string(i));
  }
  const auto a = csk::loso_cv(x, labels, ids, 1.0, 1);
  const auto b = csk::loso_cv(x, labels, ids, 1.0, 4);
  CHECK(a.metrics == b.metrics);
  for (std::size_t i = 0; i < 14; ++i) CHECK(a.folds[i].prediction == b.folds[i].prediction);
}
