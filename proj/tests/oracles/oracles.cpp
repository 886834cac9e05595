#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace oracle {

namespace {

// Sum over closed walks of d steps starting at level n of the product of
// (k + 1) over every up step k -> k + 1. Each edge of a closed walk is climbed
// and descended equally often, so sqrt(k+1) factors pair up.
void walk(int level, int steps_left, int n, const Rational& weight, Rational& total) {
  if (steps_left == 0) {
    if (level == n) total += weight;
    return;
  }
  if (std::abs(level - n) > steps_left) return;
  walk(level + 1, steps_left - 1, n, weight * (level + 1), total);
  if (level > 0) walk(level - 1, steps_left - 1, n, weight, total);
}

Eigen::MatrixXd position(int size, double omega) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(size, size);
  for (int k = 0; k + 1 < size; ++k) {
    x(k, k + 1) = x(k + 1, k) = std::sqrt((k + 1) / (2.0 * omega));
  }
  return x;
}

Eigen::MatrixXd polynomial_matrix(const std::vector<double>& poly, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(x.rows(), x.cols());
  for (std::size_t d = 0; d < poly.size(); ++d) {
    if (d > 0) power = power * x;
    out += poly[d] * power;
  }
  return out;
}

}  // namespace

Rational ladder_moment(int n, int d) {
  if (d % 2 != 0) throw std::invalid_argument("odd power");
  Rational total = 0;
  walk(n, d, n, Rational(1), total);
  return total / Rational(boost::multiprecision::cpp_int(1) << (d / 2));
}

double second_order_energy(int n, const std::vector<double>& poly) {
  int degree = static_cast<int>(poly.size()) - 1;
  int size = n + 2 * degree + 4;
  // Padding keeps the rows reached from |n> exact.
  Eigen::MatrixXd V = polynomial_matrix(poly, position(size + degree, 1.0)).topLeftCorner(size, size);
  double e2 = 0;
  for (int m = 0; m < size; ++m) {
    if (m != n) e2 -= V(m, n) * V(m, n) / (m - n);
  }
  return e2;
}

std::vector<double> polynomial_levels(const std::vector<double>& poly, int basis, double omega, int count) {
  int degree = static_cast<int>(poly.size()) - 1;
  int big = basis + degree + 2;
  Eigen::MatrixXd x = position(big, omega);
  // p^2 = -(omega/2)(a^dagger - a)^2
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(big, big);
  for (int k = 0; k + 1 < big; ++k) a(k, k + 1) = std::sqrt(k + 1.0);
  Eigen::MatrixXd diff = a.transpose() - a;
  Eigen::MatrixXd p2 = -(omega / 2) * diff * diff;
  Eigen::MatrixXd H = (0.5 * p2 + polynomial_matrix(poly, x)).topLeftCorner(basis, basis);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

std::vector<double> pure_quartic_levels(int basis, double omega, int count) {
  return polynomial_levels({0, 0, 0, 0, 1}, basis, omega, count);
}

double barrier_transmission(double E, double lambda) {
  if (E == 1) return 2 / (2 + lambda);
  if (E < 1) {
    double s = std::sinh(std::sqrt(2 * lambda * (1 - E)));
    return 1 / (1 + s * s / (4 * E * (1 - E)));
  }
  double s = std::sin(std::sqrt(2 * lambda * (E - 1)));
  return 1 / (1 + s * s / (4 * E * (E - 1)));
}

std::vector<double> morse_levels(double lambda) {
  std::vector<double> out;
  double r = std::sqrt(2 * lambda);
  for (int n = 0; n + 0.5 < r; ++n) out.push_back(r * (n + 0.5) - (n + 0.5) * (n + 0.5) / 2);
  return out;
}

}  // namespace oracle
