#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <stdexcept>

#include "assembly.hpp"
#include "basis.hpp"

namespace grbf {

struct SingularError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AssembledSystem {
  Eigen::MatrixXd lhs;
  Eigen::VectorXd rhs;
  double gamma = 0.0;
};

// Weak Poisson system: stiffness plus, on bounded domains, the boundary
// penalty gamma·(⟨ψ_u, ψ_v⟩_Γ, ⟨g, ψ_u⟩_Γ).
AssembledSystem build_poisson(const Basis& basis, const ForcingTerm& f, double gamma,
                              const std::function<double(const Eigen::VectorXd&)>& boundary_g,
                              int boundary_samples = 1024, std::uint64_t seed = 0x5eed);

// First-order system F − ∇u = G, ∇·F = f on the whole space. The one-form
// trial/test space is the augmented one: the plain gradients ∇ψ_i (integrable
// even though the constant zero-form is not) together with the antisymmetric
// pairs ψ_ab. With M̂¹ = [[S⁰, D⁰], [D⁰ᵀ, M¹]] and D̂⁰ = [S⁰ D⁰]:
//   [ M̂¹   −D̂⁰ᵀ] [F̂]   [⟨G, ∇ψ_i⟩; ⟨G, ψ_ab⟩]
//   [−D̂⁰     0 ] [û] = [⟨f, ψ_i⟩            ]
// Containing the gradients makes the zero-form block stable: testing the first
// equation against ∇ψ_i pins û through S⁰ instead of through whatever overlap
// the pair cloud happens to have. The unknown ordering is gradient
// coefficients, then pair coefficients, then zero-form coefficients.
struct VectorFieldTerm {
  int dim = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value;
  std::function<double(const Basis&, int, int)> pair_inner;  // ⟨G, ψ_ab⟩
  std::function<double(const Basis&, int)> gradient_inner;   // ⟨G, ∇ψ_i⟩
};
AssembledSystem build_mixed_darcy(const Basis& basis, const VectorFieldTerm& g_field,
                                  const ForcingTerm& f);

// Minimum-norm least-squares solve through the SVD. Singular values below
// rel_cutoff times the largest are discarded; kappa is the ratio of the
// largest retained to the smallest retained singular value.
struct LeastSquaresResult {
  Eigen::VectorXd x;
  double kappa = 0.0;
  int rank = 0;
};
LeastSquaresResult solve_least_squares(const Eigen::MatrixXd& lhs, const Eigen::VectorXd& rhs,
                                       double rel_cutoff = 1e-14);

// Σ_u c_u ψ_u at each row of `points`.
Eigen::VectorXd evaluate_zero_form(const Basis& basis, const Eigen::VectorXd& coeffs,
                                   const Eigen::MatrixXd& points);
// Σ_{a<b} c_ab ψ_ab at each row of `points`; result rows are field values.
Eigen::MatrixXd evaluate_pair_form(const Basis& basis, const Eigen::VectorXd& coeffs,
                                   const Eigen::MatrixXd& points);
// Augmented one-form Σ_i c_i ∇ψ_i + Σ_{a<b} c_ab ψ_ab; the coefficient layout
// matches the mixed system's F block (gradients first, then pairs).
Eigen::MatrixXd evaluate_one_form(const Basis& basis, const Eigen::VectorXd& coeffs,
                                  const Eigen::MatrixXd& points);

// ‖predicted − truth‖²_F / ‖truth‖²_F
double relative_mse(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth);

}  // namespace grbf
