#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "rng.hpp"
#include "support/oracles.hpp"
#include "training.hpp"

using grbf::Basis;
using grbf::Gaussian;

TEST_CASE("parameter packing round trip") {
  CHECK(grbf::parameter_block_size(3, false) == 3 + 6);
  CHECK(grbf::parameter_block_size(3, true) == 4);
  CHECK(grbf::parameter_count(5, 2, false) == 5 * 5);

  grbf::Rng rng(51);
  std::vector<Gaussian> gs;
  for (int i = 0; i < 3; ++i)
    gs.emplace_back(rng.normal_vector(2), testsupport::random_spd_conditioned(rng, 2, 0.3, 2.0));
  const Basis basis(gs, grbf::Domain::unbounded(2));

  const Eigen::VectorXd theta = grbf::pack_parameters(basis, false);
  REQUIRE(theta.size() == 3 * 5);
  const std::vector<Gaussian> back = grbf::unpack_gaussians(theta, 3, 2, false);
  for (int i = 0; i < 3; ++i) {
    CHECK((back[i].mean() - gs[i].mean()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((back[i].cov() - gs[i].cov()).cwiseAbs().maxCoeff() < 1e-13);
  }

  // Isotropic round trip.
  std::vector<Gaussian> iso;
  for (int i = 0; i < 2; ++i)
    iso.emplace_back(rng.normal_vector(2), 0.7 * Eigen::MatrixXd::Identity(2, 2));
  const Basis iso_basis(iso, grbf::Domain::unbounded(2));
  const Eigen::VectorXd iso_theta = grbf::pack_parameters(iso_basis, true);
  REQUIRE(iso_theta.size() == 2 * 3);
  const std::vector<Gaussian> iso_back = grbf::unpack_gaussians(iso_theta, 2, 2, true);
  for (int i = 0; i < 2; ++i)
    CHECK((iso_back[i].cov() - iso[i].cov()).cwiseAbs().maxCoeff() < 1e-14);

  // Packing an anisotropic covariance isotropically is rejected.
  CHECK_THROWS_AS(grbf::pack_parameters(basis, true), std::invalid_argument);
  CHECK_THROWS_AS(grbf::unpack_gaussians(theta, 3, 3, false), std::invalid_argument);
}

TEST_CASE("unpacked covariances are spd by construction") {
  grbf::Rng rng(52);
  const Eigen::VectorXd theta = rng.normal_vector(grbf::parameter_count(2, 3, false));
  const std::vector<Gaussian> gs = grbf::unpack_gaussians(theta, 2, 3, false);
  for (const Gaussian& g : gs) {
    const Eigen::LLT<Eigen::MatrixXd> llt(g.cov());
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("fill distance") {
  Eigen::MatrixXd pts(3, 1);
  pts << 0.0, 0.5, 1.0;
  Eigen::VectorXd lo(1), hi(1);
  lo << 0.0;
  hi << 1.0;
  CHECK(grbf::fill_distance(pts, lo, hi) == doctest::Approx(0.25).epsilon(1e-12));

  Eigen::MatrixXd center(1, 2);
  center << 0.5, 0.5;
  Eigen::VectorXd lo2 = Eigen::VectorXd::Zero(2), hi2 = Eigen::VectorXd::Ones(2);
  CHECK(grbf::fill_distance(center, lo2, hi2) ==
        doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("adam step") {
  grbf::AdamState state;
  Eigen::VectorXd theta(2);
  theta << 1.0, -2.0;
  const Eigen::VectorXd before = theta;

  grbf::adam_step(state, theta, Eigen::VectorXd::Zero(2), 0.1);
  CHECK(theta == before);
  CHECK(state.step == 1);

  // With bias correction the first step moves by lr·sign(g) up to ε.
  Eigen::VectorXd grad(2);
  grad << 0.5, -3.0;
  grbf::AdamState fresh;
  grbf::adam_step(fresh, theta, grad, 0.1);
  CHECK(theta(0) == doctest::Approx(before(0) - 0.1).epsilon(1e-6));
  CHECK(theta(1) == doctest::Approx(before(1) + 0.1).epsilon(1e-6));
}

TEST_CASE("loss evaluator caching is exact") {
  const grbf::ProblemSpec spec = grbf::make_problem(1);
  const grbf::Dataset data = grbf::sample_data(spec, 128, 3);
  const int n = 4;

  grbf::LossEvaluator warm(spec, data, n, false);
  const Eigen::VectorXd theta0 = grbf::pack_parameters(grbf::init_basis(spec, n, 3), false);
  Eigen::VectorXd theta1 = theta0;
  theta1(2) += 0.05;  // single-block perturbation, the finite-difference pattern
  theta1(7) -= 0.03;

  const double a0 = warm.eval(theta0).loss;
  const double a1 = warm.eval(theta1).loss;
  const double a0_again = warm.eval(theta0).loss;

  grbf::LossEvaluator fresh1(spec, data, n, false);
  CHECK(fresh1.eval(theta1).loss == a1);
  grbf::LossEvaluator fresh0(spec, data, n, false);
  CHECK(fresh0.eval(theta0).loss == a0);
  CHECK(a0_again == a0);
  CHECK(warm.evaluations() == 3);
}

TEST_CASE("finite-difference gradient matches a dense quotient") {
  const grbf::ProblemSpec spec = grbf::make_problem(1);
  const grbf::Dataset data = grbf::sample_data(spec, 64, 3);
  grbf::LossEvaluator loss(spec, data, 3, false);
  const Eigen::VectorXd theta = grbf::pack_parameters(grbf::init_basis(spec, 3, 3), false);

  const double fd_step = 1e-6;
  const Eigen::VectorXd grad = grbf::fd_gradient(loss, theta, fd_step);
  REQUIRE(grad.size() == theta.size());

  grbf::LossEvaluator check(spec, data, 3, false);
  for (int k : {0, 2, 4}) {
    const double h = fd_step * (1.0 + std::abs(theta(k)));
    Eigen::VectorXd up = theta, down = theta;
    up(k) += h;
    down(k) -= h;
    const double want = (check.eval(up).loss - check.eval(down).loss) / (2.0 * h);
    CHECK(grad(k) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("training improves the unbounded benchmark") {
  grbf::TrainConfig config;
  config.steps = 5;
  config.lr = 0.01;
  config.data_count = 128;
  config.data_seed = 3;
  config.init_seed = 3;

  const grbf::TrainResult result = grbf::train(grbf::make_problem(1), 4, config);
  CHECK(result.trace.size() == 6);  // initial point plus one entry per step
  CHECK(result.steps_run == 5);
  CHECK(result.loss <= result.loss_initial);
  CHECK(result.loss == result.trace.back().loss);
  CHECK(result.stop_reason == grbf::StopReason::Completed);
  CHECK(result.seconds >= 0.0);
  CHECK(std::isfinite(result.kappa));
  CHECK(result.theta.size() == grbf::parameter_count(4, 1, false));
}

TEST_CASE("quasi-newton training improves the unbounded benchmark") {
  grbf::TrainConfig config;
  config.steps = 5;
  config.optimizer = grbf::TrainConfig::Optimizer::Lbfgs;
  config.data_count = 128;
  config.data_seed = 3;
  config.init_seed = 3;

  const grbf::TrainResult result = grbf::train(grbf::make_problem(1), 4, config);
  CHECK(result.loss <= result.loss_initial);
  CHECK(result.loss < result.trace.front().loss * (1.0 + 1e-12));
  CHECK(result.stop_reason == grbf::StopReason::Completed);
}

TEST_CASE("stop reason names") {
  CHECK(std::string(grbf::stop_reason_name(grbf::StopReason::Completed)) == "completed");
  CHECK(std::string(grbf::stop_reason_name(grbf::StopReason::ConditionThreshold)) ==
        "condition-threshold");
  CHECK(std::string(grbf::stop_reason_name(grbf::StopReason::NonFiniteLoss)) ==
        "non-finite-loss");
}

TEST_CASE("evaluator rejects bad setups") {
  const grbf::ProblemSpec spec = grbf::make_problem(1);
  const grbf::Dataset data = grbf::sample_data(spec, 16, 1);
  CHECK_THROWS_AS(grbf::LossEvaluator(spec, data, 0, false), std::invalid_argument);

  grbf::ProblemSpec no_pairing = spec;
  no_pairing.forcing.inner_with_gaussian = nullptr;
  CHECK_THROWS_AS(grbf::LossEvaluator(no_pairing, data, 2, false), std::invalid_argument);
}
