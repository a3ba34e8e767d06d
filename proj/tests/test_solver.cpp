#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "problems.hpp"
#include "rng.hpp"
#include "solver.hpp"
#include "support/oracles.hpp"
#include "support/run.hpp"

using grbf::Basis;
using grbf::Gaussian;

TEST_CASE("least squares") {
  Eigen::MatrixXd a(3, 2);
  a << 1.0, 0.0, 0.0, 2.0, 0.0, 0.0;
  Eigen::VectorXd b(3);
  b << 3.0, 4.0, 5.0;
  const grbf::LeastSquaresResult r = grbf::solve_least_squares(a, b);
  CHECK(r.x(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(r.x(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r.rank == 2);
  CHECK(r.kappa == doctest::Approx(2.0).epsilon(1e-14));

  // Rank-deficient: the cutoff drops the zero direction and the solution is
  // minimum-norm.
  Eigen::MatrixXd low(2, 2);
  low << 1.0, 1.0, 1.0, 1.0;
  Eigen::VectorXd ones(2);
  ones << 2.0, 2.0;
  const grbf::LeastSquaresResult mn = grbf::solve_least_squares(low, ones);
  CHECK(mn.rank == 1);
  CHECK(mn.x(0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(mn.x(1) == doctest::Approx(1.0).epsilon(1e-13));

  CHECK_THROWS_AS(grbf::solve_least_squares(Eigen::MatrixXd::Zero(2, 2), ones),
                  grbf::SingularError);
  CHECK_THROWS_AS(grbf::solve_least_squares(a, ones), grbf::DimensionError);
}

TEST_CASE("poisson system guards") {
  const grbf::ProblemSpec p1 = grbf::make_problem(1);
  const Basis basis = grbf::init_basis(p1, 4, 1);
  CHECK_THROWS_AS(grbf::build_poisson(basis, p1.forcing, -1.0, nullptr), std::invalid_argument);
  CHECK_THROWS_AS(grbf::build_poisson(basis, p1.forcing, 3.0, nullptr), std::invalid_argument);

  const grbf::AssembledSystem sys = grbf::build_poisson(basis, p1.forcing, 0.0, nullptr);
  CHECK(sys.lhs.rows() == 4);
  CHECK(sys.gamma == 0.0);
  CHECK((sys.lhs - sys.lhs.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("unbounded poisson solve reaches the expected accuracy band") {
  const grbf::ProblemSpec p1 = grbf::make_problem(1);
  const testsupport::SolveRun run = testsupport::run_solve(p1, 16);
  CHECK(run.rel_mse < 1e-3);
  CHECK(run.kappa >= 1.0);
}

TEST_CASE("conditioning grows with the basis size") {
  const grbf::ProblemSpec p1 = grbf::make_problem(1);
  double prev = 0.0;
  for (int n : {4, 8, 16}) {
    const testsupport::SolveRun run = testsupport::run_solve(p1, n);
    CHECK(run.kappa >= prev);
    prev = run.kappa;
  }
}

TEST_CASE("mixed first-order system structure") {
  const grbf::ProblemSpec p4 = grbf::make_problem(4);
  const Basis basis = grbf::init_basis(p4, 3, 1);
  const grbf::AssembledSystem sys = grbf::build_mixed_darcy(basis, *p4.vector_forcing, p4.forcing);

  const int n = basis.gaussian_count();
  const int p = static_cast<int>(grbf::pair_index_list(basis).size());
  const int nf = n + p;
  REQUIRE(sys.lhs.rows() == nf + n);
  CHECK((sys.lhs - sys.lhs.transpose()).cwiseAbs().maxCoeff() < 1e-12);

  const grbf::AugmentedOneForm aug =
      grbf::assemble_augmented(grbf::assemble_stiffness0(basis), grbf::assemble_mixed_d0(basis),
                               grbf::assemble_mass1(basis), false);
  CHECK(sys.lhs.topLeftCorner(nf, nf) == aug.mass);
  CHECK(sys.lhs.bottomLeftCorner(n, nf) == -aug.differential);
  CHECK(sys.lhs.bottomRightCorner(n, n).cwiseAbs().maxCoeff() == 0.0);

  // ⟨G, ∇φ_i⟩ rows precede the pair rows.
  for (int i = 0; i < n; ++i)
    CHECK(sys.rhs(i) == p4.vector_forcing->gradient_inner(basis, i));

  const grbf::ProblemSpec p1 = grbf::make_problem(1);
  CHECK_THROWS_AS(
      grbf::build_mixed_darcy(grbf::init_basis(p1, 3, 1), *p4.vector_forcing, p1.forcing),
      std::invalid_argument);
  grbf::VectorFieldTerm no_grad = *p4.vector_forcing;
  no_grad.gradient_inner = nullptr;
  CHECK_THROWS_AS(grbf::build_mixed_darcy(basis, no_grad, p4.forcing), std::invalid_argument);
}

TEST_CASE("pair-form evaluation is the antisymmetrized field") {
  grbf::Rng rng(301);
  std::vector<Gaussian> gs;
  for (int i = 0; i < 3; ++i)
    gs.emplace_back(rng.normal_vector(3), testsupport::random_spd_conditioned(rng, 3, 0.5, 1.5));
  const Basis basis(gs, grbf::Domain::unbounded(3));
  const auto pairs = grbf::pair_index_list(basis);
  Eigen::VectorXd coeffs(pairs.size());
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) coeffs(k) = rng.normal();

  Eigen::MatrixXd pts(5, 3);
  for (int r = 0; r < 5; ++r) pts.row(r) = rng.normal_vector(3).transpose();
  const Eigen::MatrixXd field = grbf::evaluate_pair_form(basis, coeffs, pts);
  REQUIRE(field.rows() == 5);
  for (int r = 0; r < 5; ++r) {
    Eigen::VectorXd want = Eigen::VectorXd::Zero(3);
    for (std::size_t k = 0; k < pairs.size(); ++k)
      want += coeffs(k) * basis.eval_pair_form(pairs[k].first, pairs[k].second,
                                               pts.row(r).transpose());
    CHECK((field.row(r).transpose() - want).cwiseAbs().maxCoeff() < 1e-14);
  }

  CHECK_THROWS_AS(grbf::evaluate_pair_form(basis, coeffs.head(2), pts), grbf::DimensionError);
  CHECK_THROWS_AS(grbf::evaluate_zero_form(basis, coeffs.head(3), pts.leftCols(2)),
                  grbf::DimensionError);

  // The augmented evaluator adds the plain gradient fields in front.
  Eigen::VectorXd full(3 + coeffs.size());
  for (Eigen::Index k = 0; k < full.size(); ++k) full(k) = rng.normal();
  full.tail(coeffs.size()) = coeffs;
  const Eigen::MatrixXd aug_field = grbf::evaluate_one_form(basis, full, pts);
  for (int r = 0; r < 5; ++r) {
    const Eigen::VectorXd x = pts.row(r).transpose();
    Eigen::VectorXd want = field.row(r).transpose();
    for (int i = 0; i < 3; ++i) {
      const Gaussian& g = basis.gaussian_at(i);
      want += full(i) * g.density(x) * g.gradient_factor(x);
    }
    CHECK((aug_field.row(r).transpose() - want).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK_THROWS_AS(grbf::evaluate_one_form(basis, coeffs, pts), grbf::DimensionError);
}

TEST_CASE("relative mse") {
  Eigen::MatrixXd truth(2, 2), pred(2, 2);
  truth << 1.0, 0.0, 0.0, 1.0;
  pred << 1.0, 0.1, 0.0, 1.0;
  CHECK(grbf::relative_mse(pred, truth) == doctest::Approx(0.005).epsilon(1e-14));
  CHECK(grbf::relative_mse(truth, truth) == 0.0);
  CHECK_THROWS_AS(grbf::relative_mse(pred, Eigen::MatrixXd::Zero(2, 2)), std::invalid_argument);
  CHECK_THROWS_AS(grbf::relative_mse(pred.leftCols(1), truth), grbf::DimensionError);
}
