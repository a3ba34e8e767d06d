#pragma once

// End-to-end drivers shared by the functional tests and the acceptance gate:
// assemble, solve, and grade a benchmark against its manufactured solution.

#include <Eigen/Dense>
#include <cstdint>

#include "problems.hpp"
#include "solver.hpp"

namespace testsupport {

struct SolveRun {
  double rel_mse = 0.0;
  double kappa = 0.0;
};

inline SolveRun run_solve(const grbf::ProblemSpec& spec, const grbf::Basis& basis,
                          std::uint64_t eval_seed = 1, int eval_count = 4096) {
  const grbf::AssembledSystem system = grbf::build_poisson(
      basis, spec.forcing, spec.penalty(basis.gaussian_count()), spec.boundary_value);
  const grbf::LeastSquaresResult sol = grbf::solve_least_squares(system.lhs, system.rhs);

  const Eigen::MatrixXd points = grbf::evaluation_points(spec, eval_count, eval_seed);
  Eigen::VectorXd exact(points.rows());
  for (Eigen::Index r = 0; r < points.rows(); ++r)
    exact(r) = spec.exact(points.row(r).transpose());
  const Eigen::VectorXd pred = grbf::evaluate_zero_form(basis, sol.x, points);
  return {grbf::relative_mse(pred, exact), sol.kappa};
}

inline SolveRun run_solve(const grbf::ProblemSpec& spec, int n, std::uint64_t seed = 1) {
  return run_solve(spec, grbf::init_basis(spec, n, seed), seed);
}

struct WhitneyRun {
  double total = 0.0;
  double mse_u = 0.0;
  double mse_f = 0.0;
  double kappa = 0.0;
};

inline WhitneyRun run_whitney(const grbf::ProblemSpec& spec, const grbf::Basis& basis,
                              std::uint64_t eval_seed = 1, int eval_count = 4096) {
  const grbf::AssembledSystem system =
      grbf::build_mixed_darcy(basis, *spec.vector_forcing, spec.forcing);
  const grbf::LeastSquaresResult sol = grbf::solve_least_squares(system.lhs, system.rhs);

  const Eigen::MatrixXd points = grbf::evaluation_points(spec, eval_count, eval_seed);
  const int count = static_cast<int>(points.rows());
  Eigen::VectorXd u_exact(count);
  Eigen::MatrixXd f_exact(count, spec.dim);
  for (int r = 0; r < count; ++r) {
    u_exact(r) = spec.exact(points.row(r).transpose());
    f_exact.row(r) = spec.exact_vector(points.row(r).transpose()).transpose();
  }

  const int form_count =
      basis.gaussian_count() + static_cast<int>(grbf::pair_index_list(basis).size());
  const Eigen::VectorXd u_pred =
      grbf::evaluate_zero_form(basis, sol.x.tail(basis.gaussian_count()), points);
  const Eigen::MatrixXd f_pred = grbf::evaluate_one_form(basis, sol.x.head(form_count), points);

  WhitneyRun run;
  const double denom = u_exact.squaredNorm() + f_exact.squaredNorm();
  run.mse_u = (u_pred - u_exact).squaredNorm() / denom;
  run.mse_f = (f_pred - f_exact).squaredNorm() / denom;
  run.total = run.mse_u + run.mse_f;
  run.kappa = sol.kappa;
  return run;
}

}  // namespace testsupport
