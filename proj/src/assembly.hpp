#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include "basis.hpp"
#include "integrals.hpp"

namespace grbf {

// ∫ (Π_a ψ_{density_idx[a]}) (⊗_b ∇ψ_{gradient_idx[b]}) over zero-form
// indices: constant densities drop out of the product, a constant gradient
// yields the zero tensor. At least one Gaussian factor must survive.
DenseTensor form_integral(const Basis& basis, std::span<const int> density_idx,
                          std::span<const int> gradient_idx);

// Entry formulas for arbitrary zero-form index combinations. Matrix assembly
// only evaluates the canonical sorted combinations; the entry functions expose
// the antisymmetry relations to the tests.
double mass0_entry(const Basis& basis, int u, int v);
double stiffness0_entry(const Basis& basis, int u, int v);
double mixed_d0_entry(const Basis& basis, int i, int a, int b);
double mass1_entry(const Basis& basis, int i, int j, int a, int b);
double mass2_entry(const Basis& basis, int i, int j, int k, int a, int b, int c);
double mixed_d1_entry(const Basis& basis, int i, int j, int a, int b, int c);

// ⟨ψ_u, ψ_v⟩ over zero-forms. With the constant included, the (0,0) entry is
// the domain volume and the constant/Gaussian cross terms use the whole-space
// value ∫φ = 1 (consistent with all other integrals being whole-space).
Eigen::MatrixXd assemble_mass0(const Basis& basis);
// ⟨∇ψ_u, ∇ψ_v⟩
Eigen::MatrixXd assemble_stiffness0(const Basis& basis);
// rows: zero-forms, cols: pairs (lexicographic); ⟨∇ψ_i, ψ_ab⟩
Eigen::MatrixXd assemble_mixed_d0(const Basis& basis);
// pairs × pairs; ⟨ψ_ij, ψ_ab⟩
Eigen::MatrixXd assemble_mass1(const Basis& basis);
// triples × triples (dim 3 only); ⟨ψ_ijk, ψ_abc⟩
Eigen::MatrixXd assemble_mass2(const Basis& basis);
// pairs × triples (dim 3 only); ⟨dψ_ij, ψ_abc⟩
Eigen::MatrixXd assemble_mixed_d1(const Basis& basis);

// Closed-form entries derived from Gaussian expectations of quadratic forms;
// independent of the moment-expansion engine, used to cross-check it.
double one_form_mass_direct(const Basis& basis, int i, int j, int a, int b);
double two_form_mass_direct(const Basis& basis, int i, int j, int k, int a, int b, int c);

// Augmented 1-form blocks for a basis whose zero-form 0 is the constant:
// pairs (0, i) are plain gradients, so the mass matrix over all pairs is
//   [[S⁰_g, D⁰_g], [D⁰_gᵀ, M¹_g]]
// with the blocks restricted to Gaussian indices, and the full differential is
// the row block [S⁰_g  D⁰_g].
struct AugmentedOneForm {
  Eigen::MatrixXd mass;
  Eigen::MatrixXd differential;
};
AugmentedOneForm assemble_augmented(const Eigen::MatrixXd& stiffness0,
                                    const Eigen::MatrixXd& mixed_d0, const Eigen::MatrixXd& mass1,
                                    bool basis_has_constant);

// Boundary penalty pieces over ∂Ω: mass(u, v) ≈ ∫_Γ ψ_u ψ_v and
// load(u) ≈ ∫_Γ g ψ_u. In 1-D the boundary is two points and the result is
// exact; otherwise a seeded area-weighted Monte Carlo estimate over the box
// faces is used.
struct BoundaryQuadrature {
  Eigen::MatrixXd mass;
  Eigen::VectorXd load;
};
BoundaryQuadrature assemble_boundary(const Basis& basis,
                                     const std::function<double(const Eigen::VectorXd&)>& g,
                                     int sample_count, std::uint64_t seed);

// Penalty weight choices: the default scaling with basis size, and an estimate
// from the largest generalized eigenvalue of (S⁰, boundary mass) on the range
// of the boundary mass (falls back to the default when the boundary mass
// vanishes).
double default_penalty(int gaussian_count);
double estimate_penalty(const Basis& basis, int sample_count, std::uint64_t seed);

// Right-hand side f with an optional exact pairing ⟨f, φ⟩ against normalized
// Gaussians; `value` must always be provided.
struct ForcingTerm {
  int dim = 0;
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<double(const Gaussian&)> inner_with_gaussian;
  std::function<double()> domain_integral;  // ⟨f, 1⟩ when the constant is present
};

// ⟨f, ψ_u⟩ for every zero-form. Exact when the descriptor carries the closed
// form; otherwise estimated by importance sampling x ~ φ_u with E[f(X)]
// (seeded, sample_count draws).
Eigen::VectorXd project_forcing(const Basis& basis, const ForcingTerm& f, int sample_count = 4096,
                                std::uint64_t seed = 0x5eed);

// ⟨w · e φ_env, ψ_ab⟩ for a vector field that is a constant direction times a
// Gaussian envelope; used by the mixed formulation right-hand side.
double envelope_pair_inner(const Basis& basis, const Gaussian& envelope,
                           const Eigen::VectorXd& direction, double weight, int a, int b);

// ⟨w · e φ_env, ∇ψ_i⟩ for the same field against a plain gradient one-form.
double envelope_gradient_inner(const Basis& basis, const Gaussian& envelope,
                               const Eigen::VectorXd& direction, double weight, int i);

}  // namespace grbf
