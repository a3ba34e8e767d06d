#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "gaussian.hpp"

namespace grbf {

enum class DomainKind { Unbounded, Box };

// Either the whole space or an axis-aligned box; boxes carry the boundary used
// by the penalty terms.
struct Domain {
  DomainKind kind = DomainKind::Unbounded;
  int dimension = 0;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static Domain unbounded(int dim);
  static Domain box(Eigen::VectorXd lo, Eigen::VectorXd hi);
  int dim() const { return dimension; }
  bool bounded() const { return kind == DomainKind::Box; }
  double volume() const;
  double surface_area() const;
};

// Gaussian trial space, optionally augmented with the constant function as
// zero-form index 0 (bounded domains only; the constant is not integrable on
// the whole space). Zero-form indices therefore run over
//   [0, gaussian_count) without the constant,
//   [0, gaussian_count], index 0 = constant, with it.
class Basis {
public:
  Basis(std::vector<Gaussian> gaussians, Domain domain, bool include_constant = false);

  int dim() const { return domain_.dim(); }
  int gaussian_count() const { return static_cast<int>(gaussians_.size()); }
  bool has_constant() const { return include_constant_; }
  int zero_form_count() const { return gaussian_count() + (include_constant_ ? 1 : 0); }
  const Domain& domain() const { return domain_; }
  const std::vector<Gaussian>& gaussians() const { return gaussians_; }

  bool is_constant_index(int u) const { return include_constant_ && u == 0; }
  const Gaussian& gaussian_at(int u) const;

  double eval_zero_form(int u, const Eigen::VectorXd& x) const;
  Eigen::VectorXd eval_zero_form_grad(int u, const Eigen::VectorXd& x) const;
  // ψ_ab = ψ_a ∇ψ_b − ψ_b ∇ψ_a for zero-form indices a, b.
  Eigen::VectorXd eval_pair_form(int a, int b, const Eigen::VectorXd& x) const;

private:
  std::vector<Gaussian> gaussians_;
  Domain domain_;
  bool include_constant_;
};

// Lexicographic index maps for the antisymmetric pair/triple spaces built on
// zero-form indices.
std::vector<std::pair<int, int>> pair_index_list(const Basis& basis);
std::vector<std::array<int, 3>> triple_index_list(const Basis& basis);

}  // namespace grbf
