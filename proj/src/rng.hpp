#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace grbf {

// Seeded generator with explicit uniform/normal transforms so that streams
// are reproducible independent of the standard library's distribution
// implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log1p(-uniform()));
    const double t = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  Eigen::VectorXd normal_vector(int d) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = normal();
    return v;
  }

  Eigen::VectorXd uniform_vector(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    Eigen::VectorXd v(lo.size());
    for (int i = 0; i < lo.size(); ++i) v(i) = uniform(lo(i), hi(i));
    return v;
  }

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace grbf
