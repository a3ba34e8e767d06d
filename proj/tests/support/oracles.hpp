#pragma once

// Independent numerical routes used to cross-check the library's closed
// forms: adaptive quadrature, finite-difference differential operators, and
// conditioned random SPD matrices.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "rng.hpp"
#include "tensor.hpp"

namespace testsupport {

inline double max_abs(const grbf::DenseTensor& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs_diff(const grbf::DenseTensor& a, const grbf::DenseTensor& b) {
  if (a.shape() != b.shape()) throw std::invalid_argument("tensor shape mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

inline double simpson_segment(const std::function<double(double)>& f, double a, double b,
                              double fa, double fm, double fb, double whole, double eps,
                              int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * eps)
    return left + right + (left + right - whole) / 15.0;
  return simpson_segment(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) +
         simpson_segment(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double eps) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_segment(f, a, b, fa, fm, fb, whole, eps, 42);
}

// Central-difference Laplacian.
inline double fd_laplacian(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x, double h) {
  double sum = 0.0;
  Eigen::VectorXd p = x;
  const double center = f(x);
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    p(k) = x(k) + h;
    const double up = f(p);
    p(k) = x(k) - h;
    const double down = f(p);
    p(k) = x(k);
    sum += (up - 2.0 * center + down) / (h * h);
  }
  return sum;
}

// Central-difference divergence of a vector field.
inline double fd_divergence(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& field,
                            const Eigen::VectorXd& x, double h) {
  double sum = 0.0;
  Eigen::VectorXd p = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    p(k) = x(k) + h;
    const double up = field(p)(k);
    p(k) = x(k) - h;
    const double down = field(p)(k);
    p(k) = x(k);
    sum += (up - down) / (2.0 * h);
  }
  return sum;
}

// SPD matrix with spectrum inside [lo, hi] (so condition at most hi/lo).
inline Eigen::MatrixXd random_spd_conditioned(grbf::Rng& rng, int d, double lo, double hi) {
  Eigen::MatrixXd raw(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) raw(i, j) = rng.normal();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd lambda(d);
  for (int i = 0; i < d; ++i) lambda(i) = rng.uniform(lo, hi);
  return q * lambda.asDiagonal() * q.transpose();
}

}  // namespace testsupport
