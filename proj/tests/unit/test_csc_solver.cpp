#include <algorithm>
#include <string>

#include <doctest.h>

#include "csk/csc_solver.hpp"
#include "csk/error.hpp"
#include "csk/synthetic.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using csk::Matrix;
using csk::Shape;
using testing::max_abs_diff;
using testing::random_matrix;

namespace {

Eigen::VectorXd stack(const csk::FeatureMapStack& maps) {
  const Eigen::Index p = maps.front().size();
  Eigen::VectorXd v(p * static_cast<Eigen::Index>(maps.size()));
  for (std::size_t k = 0; k < maps.size(); ++k)
    v.segment(static_cast<Eigen::Index>(k) * p, p) = Eigen::Map<const Eigen::VectorXd>(maps[k].data(), p);
  return v;
}

double stack_diff(const csk::FeatureMapStack& a, const csk::FeatureMapStack& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, max_abs_diff(a[k], b[k]));
  return worst;
}

struct CodingInstance {
  std::vector<Matrix> kernels;
  csk::KernelBank bank;
  Matrix x;
};

CodingInstance random_instance(std::mt19937_64& rng, Shape grid, std::size_t k, Eigen::Index ks) {
  std::vector<Matrix> kernels;
  for (std::size_t i = 0; i < k; ++i) kernels.push_back(testing::random_unit_kernel(rng, ks, ks));
  csk::KernelBank bank(kernels, grid);
  return {kernels, bank, random_matrix(rng, grid.rows, grid.cols)};
}

csk::CodingState random_state(std::mt19937_64& rng, std::size_t k, Shape s) {
  csk::CodingState st;
  for (std::size_t i = 0; i < k; ++i) {
    st.e.push_back(random_matrix(rng, s.rows, s.cols, 0.3));
    st.b.push_back(random_matrix(rng, s.rows, s.cols, 0.3));
    st.u.push_back(random_matrix(rng, s.rows, s.cols, 0.3));
  }
  return st;
}

}  // namespace

TEST_CASE("solver config validation") {
  csk::SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.gamma = 2.5;
  CHECK_THROWS_AS(cfg.validate(), csk::InvalidInput);
  cfg = {};
  cfg.alpha = -1;
  CHECK_THROWS_AS(cfg.validate(), csk::InvalidInput);
  cfg = {};
  CHECK(cfg.eta() == doctest::Approx(0.05));
}

TEST_CASE("code_step: gamma = 1 returns the unrelaxed pair exactly") {
  std::mt19937_64 rng(31);
  const Shape grid{6, 7};
  auto inst = random_instance(rng, grid, 3, 2);
  const auto st = random_state(rng, 3, grid);
  csk::SolverConfig cfg;
  cfg.alpha = 0.2;
  const csk::CodingOperator op(inst.bank, cfg.lambda);
  const auto data = op.data_term(inst.x);
  const auto next = csk::code_step(st, op, data, cfg);

  csk::FeatureMapStack target;
  for (std::size_t k = 0; k < 3; ++k) target.push_back(st.b[k] - st.u[k]);
  const auto e = op.solve(data, target);
  for (std::size_t k = 0; k < 3; ++k) {
    const Matrix u_bar = st.u[k] + e[k] - st.b[k];
    const Matrix b_bar = csk::soft_threshold(Matrix(e[k] + u_bar), cfg.alpha);
    CHECK(max_abs_diff(next.u[k], u_bar) == 0.0);
    CHECK(max_abs_diff(next.b[k], b_bar) == 0.0);
  }
}

TEST_CASE("code_step: vanishing lambda from zero state stays at zero") {
  std::mt19937_64 rng(32);
  auto inst = random_instance(rng, {5, 5}, 2, 2);
  csk::SolverConfig cfg;
  cfg.lambda = 1e-14;
  const auto next = csk::code_step(csk::CodingState::zeros(2, {5, 5}), inst.bank, inst.x, cfg);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(next.e[k].cwiseAbs().maxCoeff() < 1e-12);
    CHECK(next.b[k].cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("code_step: e matches the dense normal equations") {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 5; ++t) {
    const Shape grid{5, 6};
    auto inst = random_instance(rng, grid, 3, 3);
    const auto st = random_state(rng, 3, grid);
    csk::SolverConfig cfg;
    cfg.lambda = 0.7;
    const auto next = csk::code_step(st, inst.bank, inst.x, cfg);

    const Eigen::MatrixXd d = oracle::conv_operator(inst.kernels, grid);
    const Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(inst.x.data(), grid.size());
    const Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(d.cols(), d.cols()) + 0.7 * d.transpose() * d;
    const Eigen::VectorXd rhs = 0.7 * d.transpose() * xv + stack(st.b) - stack(st.u);
    const Eigen::VectorXd want = sys.ldlt().solve(rhs);
    CHECK((stack(next.e) - want).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("dict_step: gamma = 1 identity, projection postcondition, dense oracle") {
  std::mt19937_64 rng(34);
  const Shape grid{5, 6};
  const std::size_t k_count = 3;
  std::vector<csk::FeatureMapStack> maps(2);
  std::vector<Matrix> xs;
  for (auto& m : maps)
    for (std::size_t k = 0; k < k_count; ++k) m.push_back(random_matrix(rng, 5, 6));
  xs.push_back(random_matrix(rng, 5, 6));
  xs.push_back(random_matrix(rng, 5, 6));

  csk::DictState st;
  for (std::size_t k = 0; k < k_count; ++k) {
    st.c.push_back(random_matrix(rng, 5, 6, 0.5));
    st.v.push_back(random_matrix(rng, 5, 6, 0.5));
  }
  st.d = st.c;
  const csk::SupportMask support(grid, 2, 3);
  csk::SolverConfig cfg;
  cfg.lambda = 0.9;
  const csk::DictOperator op(maps, xs, cfg.lambda);
  const auto next = csk::dict_step(st, op, support, cfg);

  // dense: (I + lambda sum_m E_m^T E_m) d = lambda sum_m E_m^T x_m + c - v
  const Eigen::Index p = grid.size(), n = p * static_cast<Eigen::Index>(k_count);
  Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd rhs = stack(st.c) - stack(st.v);
  for (std::size_t m = 0; m < 2; ++m) {
    const Eigen::MatrixXd e = oracle::conv_operator(maps[m], grid);
    sys += 0.9 * e.transpose() * e;
    rhs += 0.9 * e.transpose() * Eigen::Map<const Eigen::VectorXd>(xs[m].data(), p);
  }
  const Eigen::VectorXd want = sys.ldlt().solve(rhs);
  CHECK((stack(next.d) - want).cwiseAbs().maxCoeff() <= 1e-8);

  for (std::size_t k = 0; k < k_count; ++k) {
    const Matrix v_bar = st.v[k] + next.d[k] - st.c[k];
    CHECK(max_abs_diff(next.v[k], v_bar) == 0.0);
    CHECK(max_abs_diff(next.c[k], csk::project_kernel(Matrix(next.d[k] + v_bar), support)) == 0.0);
    CHECK(next.c[k].norm() <= 1.0 + 1e-12);
    for (Eigen::Index i = 0; i < 5; ++i)
      for (Eigen::Index j = 0; j < 6; ++j)
        if (!support.contains(i, j)) CHECK(next.c[k](i, j) == 0.0);
  }

  // with a feasible c, a relaxed step (gamma < 1) mixes two feasible kernels
  for (auto& c : st.c) c = csk::project_kernel(c, support);
  const auto feasible = csk::dict_step(st, op, support, cfg);
  cfg.gamma = 0.6;
  const auto relaxed = csk::dict_step(st, op, support, cfg);
  for (std::size_t k = 0; k < k_count; ++k) {
    CHECK(relaxed.c[k].norm() <= 1.0 + 1e-12);
    CHECK(max_abs_diff(relaxed.d[k], feasible.d[k]) == 0.0);
  }
}

TEST_CASE("solve_coding: dead zone, zero input") {
  std::mt19937_64 rng(35);
  auto inst = random_instance(rng, {6, 6}, 2, 2);
  csk::SolverConfig cfg;
  cfg.alpha = 1e6;
  for (const auto& m : csk::solve_coding(inst.x, inst.bank, cfg)) CHECK(m.cwiseAbs().maxCoeff() == 0.0);
  cfg = {};
  for (const auto& m : csk::solve_coding(Matrix::Zero(6, 6), inst.bank, cfg)) CHECK(m.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solve_coding: planted instance reaches the proximal-gradient optimum") {
  std::mt19937_64 rng(36);
  const Shape grid{8, 9};
  auto inst = random_instance(rng, grid, 2, 3);
  std::bernoulli_distribution on(0.15);
  inst.x.setZero();
  for (std::size_t k = 0; k < 2; ++k) {
    Matrix e0 = Matrix::Zero(8, 9);
    for (Eigen::Index i = 0; i < e0.size(); ++i)
      if (on(rng)) e0.data()[i] = 1.0;
    inst.x += oracle::conv2_loop(inst.kernels[k], e0);
  }
  csk::SolverConfig cfg;
  cfg.alpha = 0.01;
  cfg.coding_iters = 5000;
  cfg.residual_tol = 1e-12;
  const auto maps = csk::solve_coding(inst.x, inst.bank, cfg);
  const double got = oracle::coding_objective(inst.x, inst.kernels, maps, cfg.eta());
  const auto ref_maps = oracle::fista_coding(inst.x, inst.kernels, cfg.eta(), 10000);
  const double ref = oracle::coding_objective(inst.x, inst.kernels, ref_maps, cfg.eta());
  CHECK(std::abs(got - ref) <= 1e-4 * std::abs(ref));
}

TEST_CASE("relaxed and unrelaxed coding reach the same minimizer") {
  std::mt19937_64 rng(37);
  auto inst = random_instance(rng, {6, 7}, 3, 2);
  for (double gamma : {1.0, 1.5, 0.7}) {
    csk::SolverConfig cfg;
    cfg.alpha = 0.1;
    cfg.gamma = gamma;
    const csk::CodingOperator op(inst.bank, cfg.lambda);
    const auto data = op.data_term(inst.x);
    auto relaxed = csk::CodingState::zeros(3, {6, 7});
    auto plain = relaxed;
    for (int it = 0; it < 3000; ++it) {
      relaxed = csk::code_step(relaxed, op, data, cfg);
      plain = csk::code_step_plain(plain, op, data, cfg);
    }
    CHECK(stack_diff(relaxed.b, plain.b) < 1e-8);
  }
}

TEST_CASE("learn_kernels: invariants, determinism, thread independence") {
  csk::PlantedSpec spec;
  spec.source_blocks = 6;
  spec.subjects = 2;
  const auto data = csk::make_planted(spec);
  csk::SolverConfig cfg;
  cfg.outer_iters = 5;
  cfg.seed = 9;
  const auto a = csk::learn_kernels(data.source, 3, {4, 4}, cfg, 1);
  const auto b = csk::learn_kernels(data.source, 3, {4, 4}, cfg, 1);
  const auto c = csk::learn_kernels(data.source, 3, {4, 4}, cfg, 3);
  CHECK(a == b);
  CHECK(a == c);
  for (const auto& k : a.kernels()) CHECK(k.norm() <= 1.0 + 1e-9);
  CHECK(a.k1() == 4);
  CHECK(a.padded_shape() == Shape{13, 26});

  csk::SourceDomain empty;
  CHECK_THROWS_AS(csk::learn_kernels(empty, 2, {4, 4}, cfg), csk::InvalidInput);
  CHECK_THROWS_AS(csk::learn_kernels(data.source, 2, {14, 4}, cfg), csk::InvalidInput);
}

TEST_CASE("initial_kernels: unit norm and seeded") {
  const auto a = csk::initial_kernels(4, {3, 5}, {8, 8}, 17);
  const auto b = csk::initial_kernels(4, {3, 5}, {8, 8}, 17);
  const auto c = csk::initial_kernels(4, {3, 5}, {8, 8}, 18);
  CHECK(a == b);
  CHECK(!(a == c));
  for (const auto& k : a.kernels()) CHECK(k.norm() == doctest::Approx(1.0).epsilon(1e-14));
}

namespace {

/// Iterations until max(primal, dual) <= tol, or -1 within `budget`.
int iterations_to(double tol, int budget, const csk::CodingOperator& op, const Matrix& x,
                  const csk::SolverConfig& cfg, bool plain) {
  const auto data = op.data_term(x);
  auto st = csk::CodingState::zeros(op.kernel_count(), op.shape());
  for (int it = 0; it < budget; ++it) {
    auto next = plain ? csk::code_step_plain(st, op, data, cfg) : csk::code_step(st, op, data, cfg);
    double r = 0.0;
    for (std::size_t k = 0; k < next.b.size(); ++k) {
      r = std::max(r, (next.e[k] - next.b[k]).cwiseAbs().maxCoeff());
      r = std::max(r, (next.b[k] - st.b[k]).cwiseAbs().maxCoeff());
    }
    st = std::move(next);
    if (r <= tol) return it + 1;
  }
  return -1;
}

}  // namespace

TEST_CASE("solve_coding: residuals fall below 1e-4 within 200 iterations") {
  std::mt19937_64 rng(39);
  std::uniform_real_distribution<double> lambda_dist(0.5, 2.0), alpha_dist(0.01, 0.2);
  int converged = 0;
  std::string slow;
  for (int t = 0; t < 20; ++t) {
    auto inst = random_instance(rng, {8, 10}, 1 + static_cast<std::size_t>(t % 3), 3);
    csk::SolverConfig cfg;
    cfg.lambda = lambda_dist(rng);
    cfg.alpha = alpha_dist(rng);
    cfg.coding_iters = 200;
    cfg.residual_tol = 1e-4;
    const csk::CodingOperator op(inst.bank, cfg.lambda);
    const auto result = csk::solve_coding_detailed(inst.x, op, cfg);
    if (result.residual <= 1e-4) ++converged;
    else slow += " " + std::to_string(result.residual);
  }
  CAPTURE(slow);
  CHECK(converged == 20);
}

TEST_CASE("relaxed coding needs as many iterations as standard ADMM at gamma = 1") {
  std::mt19937_64 rng(40);
  for (int t = 0; t < 10; ++t) {
    auto inst = random_instance(rng, {8, 10}, 1 + static_cast<std::size_t>(t % 3), 3);
    csk::SolverConfig cfg;
    cfg.alpha = 0.15;
    const csk::CodingOperator op(inst.bank, cfg.lambda);
    const int relaxed = iterations_to(1e-4, 3000, op, inst.x, cfg, false);
    const int plain = iterations_to(1e-4, 3000, op, inst.x, cfg, true);
    REQUIRE(plain > 0);
    REQUIRE(relaxed > 0);
    CHECK(std::abs(relaxed - plain) <= std::max(5, plain / 50));
    cfg.gamma = 1.8;
    CHECK(iterations_to(1e-4, 3000, op, inst.x, cfg, false) <= relaxed);
  }
}
