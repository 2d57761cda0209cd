#pragma once

// Straight-line reference implementations used only by the tests. They share
// no code with the library beyond Eigen storage.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd gaussian(int rows, int cols, unsigned seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> nd;
  MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = nd(g);
  return m;
}

inline VectorXd unit(int d, unsigned seed) {
  VectorXd v = gaussian(d, 1, seed).col(0);
  return v / v.norm();
}

inline double amplitude_loss(const MatrixXd& V, const VectorXd& y, const VectorXd& u) {
  double s = 0;
  for (int i = 0; i < V.cols(); ++i) {
    const double r = std::abs(V.col(i).dot(u)) - y(i);
    s += r * r;
  }
  return s / (2.0 * V.cols());
}

inline double smoothed_loss(const MatrixXd& V, const VectorXd& y, const VectorXd& u, double eps) {
  double s = 0;
  for (int i = 0; i < V.cols(); ++i) {
    const double z = V.col(i).dot(u);
    const double q = V.col(i).squaredNorm();
    const double r = std::sqrt(z * z + eps * q) - std::sqrt(y(i) * y(i) + eps * q);
    s += r * r;
  }
  return s / (2.0 * V.cols());
}

/// Central differences of a scalar function.
template <class F>
VectorXd fd_grad(F f, const VectorXd& u, double h) {
  VectorXd g(u.size());
  for (int k = 0; k < u.size(); ++k) {
    VectorXd p = u, m = u;
    p(k) += h;
    m(k) -= h;
    g(k) = (f(p) - f(m)) / (2 * h);
  }
  return g;
}

/// Every candidate c in values with |{b ≤ c}|/n ≤ γ, maximum; the minimum
/// value when none qualifies.
inline double brute_quantile(const std::vector<double>& values, double gamma) {
  const double n = static_cast<double>(values.size());
  double best = *std::min_element(values.begin(), values.end());
  bool found = false;
  for (double c : values) {
    const double cnt = static_cast<double>(std::count_if(values.begin(), values.end(),
                                                         [c](double b) { return b <= c; }));
    if (cnt / n <= gamma && (!found || c > best)) {
      best = c;
      found = true;
    }
  }
  return best;
}

}  // namespace oracle
