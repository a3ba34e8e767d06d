#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "gaussian.hpp"
#include "rng.hpp"
#include "support/oracles.hpp"

using grbf::Gaussian;

namespace {

Gaussian unit_normal(int d) {
  return Gaussian(Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d));
}

}  // namespace

TEST_CASE("density values") {
  const Gaussian g = unit_normal(1);
  Eigen::VectorXd x(1);
  x << 0.0;
  CHECK(g.density(x) == doctest::Approx(0.3989422804014327).epsilon(1e-15));
  x << 1.0;
  CHECK(g.density(x) == doctest::Approx(0.3989422804014327 * std::exp(-0.5)).epsilon(1e-14));

  const Gaussian g2 = unit_normal(2);
  Eigen::VectorXd y(2);
  y << 1.0, 1.0;
  CHECK(g2.density(y) == doctest::Approx(0.05854983152431917).epsilon(1e-14));
  CHECK(g2.log_density(y) == doctest::Approx(std::log(0.05854983152431917)).epsilon(1e-14));
}

TEST_CASE("construction validates the covariance") {
  Eigen::VectorXd m(2);
  m << 0.0, 0.0;

  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(Gaussian(m, asym), grbf::NotSpdError);

  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(Gaussian(m, indefinite), grbf::NotSpdError);

  Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(2, 2);
  singular(0, 0) = 1.0;
  CHECK_THROWS_AS(Gaussian(m, singular), grbf::NotSpdError);

  CHECK_THROWS_AS(Gaussian(m, Eigen::MatrixXd::Identity(3, 3)), grbf::DimensionError);

  // A well-conditioned anisotropic covariance is accepted and reproduced.
  Eigen::MatrixXd cov(2, 2);
  cov << 2.0, 0.3, 0.3, 0.5;
  const Gaussian g(m, cov);
  CHECK((g.chol_lower() * g.chol_lower().transpose() - cov).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((g.precision() * cov - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(g.log_det_cov() == doctest::Approx(std::log(cov.determinant())).epsilon(1e-13));
}

TEST_CASE("gradient matches a finite difference") {
  grbf::Rng rng(31);
  Eigen::VectorXd m(3);
  m << 0.2, -0.4, 0.9;
  const Gaussian g(m, testsupport::random_spd_conditioned(rng, 3, 0.4, 1.8));
  const Eigen::VectorXd x = rng.normal_vector(3);
  const Eigen::VectorXd grad = g.grad_density(x);
  const double h = 1e-6;
  Eigen::VectorXd p = x;
  for (int k = 0; k < 3; ++k) {
    p(k) = x(k) + h;
    const double up = g.density(p);
    p(k) = x(k) - h;
    const double down = g.density(p);
    p(k) = x(k);
    CHECK(grad(k) == doctest::Approx((up - down) / (2.0 * h)).epsilon(1e-6));
  }
  CHECK((g.grad_density(m)).norm() == doctest::Approx(0.0));
}

TEST_CASE("product weights") {
  const Gaussian n01 = unit_normal(1);
  const std::vector<Gaussian> pair = {n01, n01};
  const grbf::WeightedGaussian same = grbf::product(pair);
  CHECK(same.weight() == doctest::Approx(0.28209479177387814).epsilon(1e-14));
  CHECK(same.density.cov()(0, 0) == doctest::Approx(0.5).epsilon(1e-14));

  Eigen::VectorXd m2(1);
  m2 << 2.0;
  const std::vector<Gaussian> apart = {n01, Gaussian(m2, Eigen::MatrixXd::Identity(1, 1))};
  const grbf::WeightedGaussian shifted = grbf::product(apart);
  CHECK(shifted.weight() == doctest::Approx(0.10377687435514868).epsilon(1e-14));
  CHECK(shifted.density.mean()(0) == doctest::Approx(1.0).epsilon(1e-14));

  const std::vector<Gaussian> triple = {n01, n01, n01};
  CHECK(grbf::product(triple).weight() ==
        doctest::Approx(1.0 / (2.0 * std::numbers::pi * std::sqrt(3.0))).epsilon(1e-14));

  const std::vector<Gaussian> single = {n01};
  CHECK(grbf::product(single).log_weight == 0.0);
  CHECK_THROWS_AS(grbf::product(std::span<const Gaussian>()), std::invalid_argument);

  // Far-separated factors underflow gracefully to zero weight.
  Eigen::VectorXd far(1);
  far << 60.0;
  const std::vector<Gaussian> distant = {n01, Gaussian(far, Eigen::MatrixXd::Identity(1, 1))};
  const grbf::WeightedGaussian tiny = grbf::product(distant);
  CHECK(tiny.weight() == 0.0);
  CHECK(std::isfinite(tiny.log_weight));
}

TEST_CASE("moment tensors") {
  grbf::Rng rng(32);
  Eigen::VectorXd m(2);
  m << 0.7, -0.2;
  const Eigen::MatrixXd cov = testsupport::random_spd_conditioned(rng, 2, 0.3, 1.5);
  const Gaussian g(m, cov);

  CHECK(grbf::tensor_moment(g, 0).value() == 1.0);
  const grbf::DenseTensor m1 = grbf::tensor_moment(g, 1);
  CHECK(m1.at({0}) == doctest::Approx(m(0)));
  CHECK(m1.at({1}) == doctest::Approx(m(1)));
  const grbf::DenseTensor second = grbf::tensor_moment(g, 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(second.at({i, j}) == doctest::Approx(cov(i, j) + m(i) * m(j)).epsilon(1e-13));

  CHECK(grbf::tensor_moment(unit_normal(1), 4).at({0, 0, 0, 0}) ==
        doctest::Approx(3.0).epsilon(1e-14));
  CHECK(grbf::tensor_moment(unit_normal(1), 3).at({0, 0, 0}) == doctest::Approx(0.0));

  // The raw moment tensor is symmetric in all modes.
  const grbf::DenseTensor third = grbf::tensor_moment(g, 3);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k) {
        CHECK(third.at({i, j, k}) == doctest::Approx(third.at({j, i, k})));
        CHECK(third.at({i, j, k}) == doctest::Approx(third.at({k, j, i})));
      }
}

TEST_CASE("hermite rule") {
  CHECK_THROWS_AS(grbf::hermite_rule(0), std::invalid_argument);

  const grbf::GaussHermiteRule rule = grbf::hermite_rule(5);
  CHECK(rule.weights.sum() == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-14));
  double x8 = 0.0;
  for (int k = 0; k < 5; ++k) x8 += rule.weights(k) * std::pow(rule.nodes(k), 8);
  CHECK(x8 == doctest::Approx(105.0 * std::sqrt(std::numbers::pi) / 16.0).epsilon(1e-13));
  for (int k = 0; k < 5; ++k)
    CHECK(rule.nodes(k) == doctest::Approx(-rule.nodes(4 - k)).epsilon(1e-12));

  // Degree 2n−1 exactness boundary: x^{2n} is no longer integrated exactly.
  const grbf::GaussHermiteRule two = grbf::hermite_rule(2);
  double x4 = 0.0;
  for (int k = 0; k < 2; ++k) x4 += two.weights(k) * std::pow(two.nodes(k), 4);
  CHECK(x4 != doctest::Approx(0.75 * std::sqrt(std::numbers::pi)).epsilon(1e-6));
}

TEST_CASE("trig integrals") {
  const Gaussian n01 = unit_normal(1);
  CHECK(grbf::trig_integral(grbf::TrigKind::Cos, 1.0, n01) ==
        doctest::Approx(0.6065306597126334).epsilon(1e-15));
  CHECK(grbf::trig_integral(grbf::TrigKind::Sin, 1.0, n01) == doctest::Approx(0.0));
  CHECK_THROWS_AS(grbf::trig_integral(grbf::TrigKind::Cos, 1.0, unit_normal(2)),
                  grbf::DimensionError);

  Eigen::VectorXd m(1);
  m << 0.4;
  const Gaussian g(m, Eigen::MatrixXd::Constant(1, 1, 0.49));
  auto integrand = [&](double x) {
    Eigen::VectorXd p(1);
    p << x;
    return std::sin(3.0 * x) * g.density(p);
  };
  const double want = testsupport::adaptive_simpson(integrand, 0.4 - 12.0, 0.4 + 12.0, 1e-13);
  CHECK(grbf::trig_integral(grbf::TrigKind::Sin, 3.0, g) ==
        doctest::Approx(want).epsilon(1e-11));
}

TEST_CASE("expectation oracles on closed-form cases") {
  const Gaussian std3 = unit_normal(3);
  const Eigen::MatrixXd id3 = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::VectorXd zero3 = Eigen::VectorXd::Zero(3);

  // E[(x−b)ᵀA(x−a)] with everything centered collapses to tr(AC).
  CHECK(grbf::quadratic_form_expectation(std3, id3, zero3, zero3) ==
        doctest::Approx(3.0).epsilon(1e-14));
  // Odd moments of a centered Gaussian vanish.
  CHECK(grbf::cubic_form_expectation(std3, id3).norm() == doctest::Approx(0.0));
  // E[‖x‖⁴] = d(d+2).
  CHECK(grbf::quadratic_pair_expectation(std3, id3, id3) ==
        doctest::Approx(15.0).epsilon(1e-13));
  CHECK(grbf::quadratic_pair_expectation_standard(id3, id3) ==
        doctest::Approx(15.0).epsilon(1e-13));

  // The biquadratic with all shifts at zero reduces to the quadratic pair.
  grbf::Rng rng(33);
  Eigen::MatrixXd A(3, 3), B(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      A(i, j) = rng.normal();
      B(i, j) = rng.normal();
    }
  CHECK(grbf::biquadratic_form_expectation(std3, A, B, zero3, zero3, zero3, zero3) ==
        doctest::Approx(grbf::quadratic_pair_expectation(std3, A, B)).epsilon(1e-12));
}

TEST_CASE("rng streams are reproducible") {
  grbf::Rng a(99), b(99);
  for (int i = 0; i < 16; ++i) CHECK(a.uniform() == b.uniform());
  for (int i = 0; i < 16; ++i) CHECK(a.normal() == b.normal());
  grbf::Rng c(100);
  CHECK(c.uniform() != a.uniform());
  grbf::Rng d(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double u = d.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(lo < 0.1);
  CHECK(hi > 0.9);
}
