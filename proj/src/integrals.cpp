#include "integrals.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace grbf {

namespace {

bool mutation_enabled = false;

std::vector<Gaussian> gather(std::span<const Gaussian> densities,
                             std::span<const Gaussian> gradients) {
  if (densities.empty() && gradients.empty())
    throw std::invalid_argument("integral requires at least one factor");
  std::vector<Gaussian> all;
  all.reserve(densities.size() + gradients.size());
  all.insert(all.end(), densities.begin(), densities.end());
  all.insert(all.end(), gradients.begin(), gradients.end());
  const int d = all[0].dim();
  for (const Gaussian& g : all)
    if (g.dim() != d) throw DimensionError("integral factors have mixed dimensions");
  return all;
}

}  // namespace

namespace detail {
void set_moment_sign_mutation(bool enabled) { mutation_enabled = enabled; }
bool moment_sign_mutation() { return mutation_enabled; }
}  // namespace detail

DenseTensor integral_moment(std::span<const Gaussian> densities,
                            std::span<const Gaussian> gradients) {
  const std::vector<Gaussian> all = gather(densities, gradients);
  const std::size_t beta = gradients.size();
  const std::size_t d = static_cast<std::size_t>(all[0].dim());

  const WeightedGaussian fused = product(all);
  const double z = fused.weight();
  if (beta == 0) return DenseTensor::scalar(z);

  std::vector<DenseTensor> moments(beta + 1);
  for (std::size_t k = 0; k <= beta; ++k) moments[k] = tensor_moment(fused.density, k);

  // ⊗_b C_{j_b}⁻¹ with factor b occupying modes (2b, 2b+1).
  DenseTensor precision_outer = DenseTensor::scalar(1.0);
  for (const Gaussian& g : gradients) {
    DenseTensor p(std::vector<std::size_t>{d, d});
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) p.at({i, j}) = g.precision()(i, j);
    precision_outer = outer(precision_outer, p);
  }

  // E[⊗_b (m_{j_b} − X)] expanded over subsets J of the gradient slots: the
  // slots in J contribute their fixed means, the rest the fused moment tensor.
  DenseTensor expectation(std::vector<std::size_t>(beta, d));
  for (std::size_t mask = 0; mask < (std::size_t{1} << beta); ++mask) {
    const std::size_t picked = static_cast<std::size_t>(std::popcount(mask));
    const std::size_t remaining = beta - picked;
    double sign = (remaining % 2 == 0) ? 1.0 : -1.0;
    if (mutation_enabled && picked == 1) sign = -sign;

    DenseTensor term = DenseTensor::scalar(1.0);
    std::vector<std::size_t> dest;
    dest.reserve(beta);
    for (std::size_t b = 0; b < beta; ++b) {
      if (mask & (std::size_t{1} << b)) {
        std::span<const double> mb(gradients[b].mean().data(), d);
        term = outer(term, outer_power(mb, 1));
        dest.push_back(b);
      }
    }
    for (std::size_t b = 0; b < beta; ++b)
      if (!(mask & (std::size_t{1} << b))) dest.push_back(b);
    term = outer(term, moments[remaining]);
    expectation.add_scaled(place_modes(term, dest), sign);
  }

  DenseTensor result = contract_even(precision_outer, expectation);
  result *= z;
  return result;
}

DenseTensor integral_gauss_hermite(std::span<const Gaussian> densities,
                                   std::span<const Gaussian> gradients,
                                   const GaussHermiteRule& rule) {
  const std::vector<Gaussian> all = gather(densities, gradients);
  const std::size_t beta = gradients.size();
  const std::size_t d = static_cast<std::size_t>(all[0].dim());
  const std::size_t n = static_cast<std::size_t>(rule.nodes.size());
  if (2 * n < beta + 1)
    throw std::invalid_argument("quadrature rule too small for the integrand degree");

  const WeightedGaussian fused = product(all);
  const double z = fused.weight();
  const Eigen::MatrixXd& S = fused.density.chol_lower();
  const Eigen::VectorXd& m = fused.density.mean();
  const double sqrt2 = std::numbers::sqrt2;

  DenseTensor acc(beta == 0 ? std::vector<std::size_t>{}
                            : std::vector<std::size_t>(beta, d));
  std::vector<std::size_t> grid(d, 0);
  std::vector<std::size_t> shape(d, n);
  Eigen::VectorXd y(static_cast<int>(d));
  do {
    double w = 1.0;
    for (std::size_t t = 0; t < d; ++t) {
      y(static_cast<int>(t)) = rule.nodes(static_cast<int>(grid[t]));
      w *= rule.weights(static_cast<int>(grid[t]));
    }
    const Eigen::VectorXd x = sqrt2 * (S * y) + m;
    DenseTensor term = DenseTensor::scalar(1.0);
    for (const Gaussian& g : gradients) {
      const Eigen::VectorXd u = g.gradient_factor(x);
      term = outer(term, outer_power(std::span<const double>(u.data(), d), 1));
    }
    acc.add_scaled(term, w);
  } while (next_index(shape, grid));

  acc *= z * std::pow(std::numbers::pi, -0.5 * static_cast<double>(d));
  return acc;
}

DenseTensor integral_gauss_hermite(std::span<const Gaussian> densities,
                                   std::span<const Gaussian> gradients) {
  const std::size_t beta = gradients.size();
  return integral_gauss_hermite(densities, gradients,
                                hermite_rule(static_cast<int>(beta / 2 + 1)));
}

}  // namespace grbf
