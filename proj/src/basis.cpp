#include "basis.hpp"

#include <stdexcept>

namespace grbf {

Domain Domain::unbounded(int dim) {
  if (dim < 1) throw std::invalid_argument("domain dimension must be positive");
  Domain d;
  d.kind = DomainKind::Unbounded;
  d.dimension = dim;
  return d;
}

Domain Domain::box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
  if (lo.size() == 0 || lo.size() != hi.size())
    throw std::invalid_argument("box bounds dimension mismatch");
  for (int i = 0; i < lo.size(); ++i)
    if (!(lo(i) < hi(i))) throw std::invalid_argument("box bounds must satisfy lo < hi");
  Domain d;
  d.kind = DomainKind::Box;
  d.dimension = static_cast<int>(lo.size());
  d.lo = std::move(lo);
  d.hi = std::move(hi);
  return d;
}

double Domain::volume() const {
  if (!bounded()) throw std::invalid_argument("volume of an unbounded domain");
  return (hi - lo).prod();
}

double Domain::surface_area() const {
  if (!bounded()) throw std::invalid_argument("surface area of an unbounded domain");
  if (dimension == 1) return 2.0;
  double total = 0.0;
  for (int axis = 0; axis < dimension; ++axis) {
    double face = 1.0;
    for (int i = 0; i < dimension; ++i)
      if (i != axis) face *= hi(i) - lo(i);
    total += 2.0 * face;
  }
  return total;
}

Basis::Basis(std::vector<Gaussian> gaussians, Domain domain, bool include_constant)
    : gaussians_(std::move(gaussians)), domain_(std::move(domain)),
      include_constant_(include_constant) {
  if (gaussians_.empty()) throw std::invalid_argument("basis needs at least one Gaussian");
  for (const Gaussian& g : gaussians_)
    if (g.dim() != domain_.dim()) throw DimensionError("basis/domain dimension mismatch");
  if (include_constant_ && !domain_.bounded())
    throw std::invalid_argument("constant zero-form requires a bounded domain");
}

const Gaussian& Basis::gaussian_at(int u) const {
  const int shift = include_constant_ ? 1 : 0;
  const int g = u - shift;
  if (u < shift || g >= gaussian_count())
    throw std::out_of_range("zero-form index has no Gaussian");
  return gaussians_[static_cast<std::size_t>(g)];
}

double Basis::eval_zero_form(int u, const Eigen::VectorXd& x) const {
  if (is_constant_index(u)) return 1.0;
  return gaussian_at(u).density(x);
}

Eigen::VectorXd Basis::eval_zero_form_grad(int u, const Eigen::VectorXd& x) const {
  if (is_constant_index(u)) return Eigen::VectorXd::Zero(dim());
  return gaussian_at(u).grad_density(x);
}

Eigen::VectorXd Basis::eval_pair_form(int a, int b, const Eigen::VectorXd& x) const {
  return eval_zero_form(a, x) * eval_zero_form_grad(b, x) -
         eval_zero_form(b, x) * eval_zero_form_grad(a, x);
}

std::vector<std::pair<int, int>> pair_index_list(const Basis& basis) {
  std::vector<std::pair<int, int>> pairs;
  const int n = basis.zero_form_count();
  pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  return pairs;
}

std::vector<std::array<int, 3>> triple_index_list(const Basis& basis) {
  if (basis.dim() != 3)
    throw std::invalid_argument("triple forms are only defined in three dimensions");
  std::vector<std::array<int, 3>> triples;
  const int n = basis.zero_form_count();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) triples.push_back({i, j, k});
  return triples;
}

}  // namespace grbf
