#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace oracle {

namespace {
Eigen::Index wrap(Eigen::Index i, Eigen::Index n) { return ((i % n) + n) % n; }
}  // namespace

Matrix conv2_loop(const Matrix& k, const Matrix& m) {
  const Eigen::Index h = m.rows(), n = m.cols();
  Matrix out = Matrix::Zero(h, n);
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index p = 0; p < k.rows(); ++p)
        for (Eigen::Index q = 0; q < k.cols(); ++q)
          out(i, j) += k(p, q) * m(wrap(i - p, h), wrap(j - q, n));
  return out;
}

Matrix corr2_loop(const Matrix& k, const Matrix& r) {
  const Eigen::Index h = r.rows(), n = r.cols();
  Matrix out = Matrix::Zero(h, n);
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index p = 0; p < k.rows(); ++p)
        for (Eigen::Index q = 0; q < k.cols(); ++q)
          out(i, j) += k(p, q) * r(wrap(i + p, h), wrap(j + q, n));
  return out;
}

Eigen::MatrixXd conv_operator(const std::vector<Matrix>& kernels, csk::Shape grid) {
  const Eigen::Index p = grid.rows * grid.cols;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(p, p * static_cast<Eigen::Index>(kernels.size()));
  for (std::size_t k = 0; k < kernels.size(); ++k)
    for (Eigen::Index a = 0; a < grid.rows; ++a)
      for (Eigen::Index b = 0; b < grid.cols; ++b) {
        const Eigen::Index col = static_cast<Eigen::Index>(k) * p + a * grid.cols + b;
        for (Eigen::Index s = 0; s < kernels[k].rows(); ++s)
          for (Eigen::Index t = 0; t < kernels[k].cols(); ++t)
            d(wrap(a + s, grid.rows) * grid.cols + wrap(b + t, grid.cols), col) += kernels[k](s, t);
      }
  return d;
}

Eigen::VectorXcd dense_regularized_solve(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& r,
                                         double lambda) {
  const Eigen::MatrixXcd sys =
      Eigen::MatrixXcd::Identity(a.cols(), a.cols()) + lambda * a.adjoint() * a;
  return sys.fullPivLu().solve(r);
}

csk::Spectrum naive_dft(const Matrix& x) {
  const Eigen::Index h = x.rows(), n = x.cols();
  csk::Spectrum out(h, n);
  for (Eigen::Index u = 0; u < h; ++u)
    for (Eigen::Index v = 0; v < n; ++v) {
      std::complex<double> s = 0.0;
      for (Eigen::Index i = 0; i < h; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
          const double ang = -2.0 * std::numbers::pi *
                             (static_cast<double>(u * i) / static_cast<double>(h) +
                              static_cast<double>(v * j) / static_cast<double>(n));
          s += x(i, j) * std::polar(1.0, ang);
        }
      out(u, v) = s;
    }
  return out;
}

double coding_objective(const Matrix& x, const std::vector<Matrix>& kernels,
                        const std::vector<Matrix>& maps, double eta) {
  Matrix r = -x;
  double l1 = 0.0;
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    r += conv2_loop(kernels[k], maps[k]);
    l1 += maps[k].cwiseAbs().sum();
  }
  return 0.5 * r.squaredNorm() + eta * l1;
}

std::vector<Matrix> fista_coding(const Matrix& x, const std::vector<Matrix>& kernels, double eta,
                                 int iterations) {
  const csk::Shape grid{x.rows(), x.cols()};
  const Eigen::Index p = grid.rows * grid.cols;
  const Eigen::MatrixXd d = conv_operator(kernels, grid);
  const Eigen::MatrixXd gram = d.transpose() * d;
  const double lip = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram).eigenvalues().maxCoeff();
  const double step = 1.0 / lip;
  const Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.data(), p);
  const Eigen::VectorXd dtx = d.transpose() * xv;

  Eigen::VectorXd e = Eigen::VectorXd::Zero(d.cols()), y = e, prev = e;
  double t = 1.0;
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd z = y - step * (gram * y - dtx);
    e = z.unaryExpr([&](double v) { return std::copysign(std::max(std::abs(v) - step * eta, 0.0), v); });
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = e + ((t - 1.0) / t_next) * (e - prev);
    prev = e;
    t = t_next;
  }
  std::vector<Matrix> maps;
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    Matrix m(grid.rows, grid.cols);
    for (Eigen::Index i = 0; i < p; ++i) m.data()[i] = e(static_cast<Eigen::Index>(k) * p + i);
    maps.push_back(m);
  }
  return maps;
}

Matrix project_kernel_closed_form(const Matrix& z, Eigen::Index k1, Eigen::Index k2) {
  Matrix out = Matrix::Zero(z.rows(), z.cols());
  double sq = 0.0;
  for (Eigen::Index i = 0; i < k1; ++i)
    for (Eigen::Index j = 0; j < k2; ++j) sq += z(i, j) * z(i, j);
  const double scale = sq > 1.0 ? 1.0 / std::sqrt(sq) : 1.0;
  for (Eigen::Index i = 0; i < k1; ++i)
    for (Eigen::Index j = 0; j < k2; ++j) out(i, j) = z(i, j) * scale;
  return out;
}

Eigen::VectorXd relief_brute(const Matrix& rows, std::span<const int> labels, std::size_t r) {
  const Eigen::Index m = rows.rows(), n = rows.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    std::vector<std::pair<double, Eigen::Index>> hits, misses;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == i) continue;
      double s = 0.0;
      for (Eigen::Index f = 0; f < n; ++f) s += (rows(i, f) - rows(j, f)) * (rows(i, f) - rows(j, f));
      auto& bucket = labels[static_cast<std::size_t>(j)] == labels[static_cast<std::size_t>(i)] ? hits : misses;
      bucket.emplace_back(std::sqrt(s), j);
    }
    std::sort(hits.begin(), hits.end());
    std::sort(misses.begin(), misses.end());
    for (std::size_t t = 0; t < r; ++t)
      for (Eigen::Index f = 0; f < n; ++f) {
        const double dh = rows(i, f) - rows(hits[t].second, f);
        const double dm = rows(i, f) - rows(misses[t].second, f);
        w(f) += dm * dm - dh * dh;
      }
  }
  return w;
}

double svm_dual_brute(const Matrix& x, std::span<const int> y, double c) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd q(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      q(i, j) = y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)] *
                (x.row(i).dot(x.row(j)) + 1.0);
  const auto objective = [&](const Eigen::VectorXd& a) { return 0.5 * a.dot(q * a) - a.sum(); };

  double best = std::numeric_limits<double>::infinity();
  std::size_t patterns = 1;
  for (Eigen::Index i = 0; i < n; ++i) patterns *= 3;
  std::vector<int> state(static_cast<std::size_t>(n));
  for (std::size_t code = 0; code < patterns; ++code) {
    std::size_t rest = code;
    std::vector<Eigen::Index> free;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      state[static_cast<std::size_t>(i)] = static_cast<int>(rest % 3);
      rest /= 3;
      if (state[static_cast<std::size_t>(i)] == 1) a(i) = c;
      if (state[static_cast<std::size_t>(i)] == 2) free.push_back(i);
    }
    if (!free.empty()) {
      const auto f = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd qff(f, f);
      Eigen::VectorXd rhs(f);
      for (Eigen::Index s = 0; s < f; ++s) {
        rhs(s) = 1.0 - q.row(free[static_cast<std::size_t>(s)]).dot(a);
        for (Eigen::Index t = 0; t < f; ++t)
          qff(s, t) = q(free[static_cast<std::size_t>(s)], free[static_cast<std::size_t>(t)]);
      }
      const Eigen::VectorXd af = qff.completeOrthogonalDecomposition().solve(rhs);
      if ((qff * af - rhs).norm() > 1e-9 * (1.0 + rhs.norm())) continue;
      for (Eigen::Index s = 0; s < f; ++s) a(free[static_cast<std::size_t>(s)]) = af(s);
    }
    if ((a.array() < -1e-12).any() || (a.array() > c + 1e-12).any()) continue;
    best = std::min(best, objective(a.cwiseMax(0.0).cwiseMin(c)));
  }
  return best;
}

}  // namespace oracle
