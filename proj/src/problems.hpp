#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>

#include "basis.hpp"
#include "solver.hpp"

namespace grbf {

struct TrainDefaults {
  int steps = 1000;
  double lr = 0.01;
  bool isotropic = false;
  int data_count = 4096;
};

// A manufactured benchmark: the PDE data (forcing, boundary values), the known
// solution used to grade results, the data-sampling and error-evaluation
// regions, and the default basis initialization.
struct ProblemSpec {
  int id = 0;
  int dim = 0;
  Domain domain;
  Eigen::VectorXd sample_lo;  // training-data region
  Eigen::VectorXd sample_hi;
  Eigen::VectorXd eval_lo;  // error-grading region; on bounded problems the
  Eigen::VectorXd eval_hi;  // domain box, since that is where the boundary-value
                            // problem defines the solution
  ForcingTerm forcing;
  std::function<double(const Eigen::VectorXd&)> exact;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> exact_vector;  // mixed problem only
  std::function<double(const Eigen::VectorXd&)> boundary_value;         // bounded only
  std::optional<VectorFieldTerm> vector_forcing;                        // mixed problem only
  bool mixed = false;
  double init_lo = 0.0;  // 1-D basis placement interval
  double init_hi = 0.0;
  TrainDefaults train;

  bool bounded() const { return domain.bounded(); }
  // Penalty weight scaling used throughout: 16 n on bounded domains.
  double penalty(int n) const { return bounded() ? default_penalty(n) : 0.0; }
};

// Supported ids: 1 (1-D unbounded Poisson), 2 (1-D penalty-bounded Poisson),
// 3 (8-D unbounded Poisson), 4 (3-D mixed first-order system).
ProblemSpec make_problem(int id);

struct Dataset {
  Eigen::MatrixXd points;         // one row per sample
  Eigen::VectorXd values;         // exact scalar solution at the points
  Eigen::MatrixXd vector_values;  // exact field values (mixed problem only)
};

// Seeded uniform samples over the problem's sampling region.
Dataset sample_data(const ProblemSpec& spec, int count, std::uint64_t seed);

// Error-evaluation points: an equispaced grid over the evaluation interval in
// 1-D, seeded uniform samples over the evaluation box otherwise.
Eigen::MatrixXd evaluation_points(const ProblemSpec& spec, int count, std::uint64_t seed);

// Default basis: 1-D problems place n means uniformly over [init_lo, init_hi]
// with width (init_hi − init_lo)/n; higher-dimensional problems draw means
// from a seeded Gaussian around the solution features with unit covariance.
Basis init_basis(const ProblemSpec& spec, int n, std::uint64_t seed);

}  // namespace grbf
