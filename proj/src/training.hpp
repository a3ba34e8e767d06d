#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "problems.hpp"

namespace grbf {

// Per-Gaussian parameter block: mean, then the lower-triangular Cholesky
// factor of the covariance stored row-major with log-diagonal (so every
// parameter vector maps to a valid SPD covariance). The isotropic variant
// stores a single log standard deviation instead of the factor.
int parameter_block_size(int dim, bool isotropic);
int parameter_count(int n, int dim, bool isotropic);
Eigen::VectorXd pack_parameters(const Basis& basis, bool isotropic);
std::vector<Gaussian> unpack_gaussians(const Eigen::VectorXd& theta, int n, int dim,
                                       bool isotropic);
Basis basis_from_parameters(const ProblemSpec& spec, const Eigen::VectorXd& theta, int n,
                            bool isotropic);

// sup over the box of the distance to the nearest point, evaluated on a probe
// grid (1025 points per axis in 1-D; coarser tensor grids, still including all
// corners, in higher dimension).
double fill_distance(const Eigen::MatrixXd& points, const Eigen::VectorXd& lo,
                     const Eigen::VectorXd& hi);

// Data-fit loss of the Galerkin solve induced by a parameter vector: assemble,
// solve, evaluate at the data points, and return the relative mean squared
// error (for the mixed problem, the combined scalar+field error). Caches all
// per-Gaussian quantities so that re-evaluation after perturbing a single
// Gaussian block only recomputes that block's rows and columns (the access
// pattern of finite differences).
class LossEvaluator {
public:
  LossEvaluator(const ProblemSpec& spec, Dataset data, int n, bool isotropic);

  struct Result {
    double loss = 0.0;
    double kappa = 0.0;
    double scalar_error = 0.0;  // mixed problem split: ‖u − û‖² / denom
    double field_error = 0.0;   //                      ‖F − F̂‖² / denom
  };
  Result eval(const Eigen::VectorXd& theta);

  int parameter_count() const;
  long long evaluations() const { return evaluations_; }
  const ProblemSpec& spec() const { return spec_; }

private:
  void refresh(const Eigen::VectorXd& theta);
  Result eval_scalar();
  Result eval_mixed();

  ProblemSpec spec_;
  Dataset data_;
  int n_;
  bool isotropic_;
  int block_;
  double gamma_ = 0.0;
  double denom_ = 0.0;
  long long evaluations_ = 0;

  Eigen::VectorXd theta_cache_;
  bool primed_ = false;
  std::vector<std::optional<Gaussian>> gaussians_;

  Eigen::MatrixXd phi_;        // data values of each Gaussian (count × n)
  Eigen::VectorXd rhs_;        // ⟨f, φ_i⟩
  Eigen::MatrixXd stiffness_;  // ⟨∇φ_i, ∇φ_j⟩
  Eigen::MatrixXd boundary_vals_;  // zero-form values at the two 1-D endpoints
  Eigen::VectorXd boundary_g_;

  // Mixed problem caches.
  std::vector<std::pair<int, int>> pairs_;
  Eigen::MatrixXd mass1_;
  Eigen::MatrixXd mixed_d0_;
  Eigen::VectorXd field_rhs_;  // ⟨G, ψ_ab⟩
  Eigen::VectorXd grad_rhs_;   // ⟨G, ∇φ_i⟩
  std::vector<Eigen::MatrixXd> psi_;       // per pair: count × dim field values
  std::vector<Eigen::MatrixXd> grad_psi_;  // per Gaussian: count × dim ∇φ_i values
};

Eigen::VectorXd fd_gradient(LossEvaluator& loss, const Eigen::VectorXd& theta, double fd_step);

// Bias-corrected Adam update (β₁ = 0.9, β₂ = 0.999, ε = 1e-8), applied in
// place. A zero gradient leaves theta unchanged.
struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  int step = 0;
};
void adam_step(AdamState& state, Eigen::VectorXd& theta, const Eigen::VectorXd& grad, double lr);

struct TrainConfig {
  int steps = 1000;
  double lr = 0.01;
  enum class Optimizer { Adam, Lbfgs } optimizer = Optimizer::Adam;
  double stop_factor = 1e-15;  // stop once loss < kappa · stop_factor
  double fd_step = 1e-6;
  bool isotropic = false;
  int data_count = 4096;
  std::uint64_t data_seed = 1;
  std::uint64_t init_seed = 1;
};

enum class StopReason { Completed, ConditionThreshold, NonFiniteLoss };
const char* stop_reason_name(StopReason reason);

struct TraceEntry {
  double loss = 0.0;
  double kappa = 0.0;
};

struct TrainResult {
  Eigen::VectorXd theta;  // best parameters seen
  double loss = 0.0;
  double loss_initial = 0.0;
  double kappa = 0.0;  // condition number at the last evaluation
  std::vector<TraceEntry> trace;
  StopReason stop_reason = StopReason::Completed;
  int steps_run = 0;
  double seconds = 0.0;
};

TrainResult train(const ProblemSpec& spec, int n, const TrainConfig& config);

}  // namespace grbf
