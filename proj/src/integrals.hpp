#pragma once

#include <span>

#include "gaussian.hpp"
#include "tensor.hpp"

namespace grbf {

// Exact value of ∫ (Π_a φ_{i_a}) (⊗_b ∇φ_{j_b}) dx over the whole space,
// returned as a tensor of order β = gradients.size() (order 0 for β = 0).
// Computed from the moments of the fused product Gaussian.
DenseTensor integral_moment(std::span<const Gaussian> densities,
                            std::span<const Gaussian> gradients);

// Same integral through a tensor-product Gauss-Hermite rule on the fused
// Gaussian; exact when the 1-D rule integrates degree-β polynomials, i.e.
// point_count ≥ ⌈(β + 1)/2⌉.
DenseTensor integral_gauss_hermite(std::span<const Gaussian> densities,
                                   std::span<const Gaussian> gradients,
                                   const GaussHermiteRule& rule);

// Convenience overload using the smallest exact rule.
DenseTensor integral_gauss_hermite(std::span<const Gaussian> densities,
                                   std::span<const Gaussian> gradients);

namespace detail {
// Test hook: deliberately corrupts one sign in the moment-form expansion so the
// selftest can demonstrate that the moment/quadrature agreement check catches it.
void set_moment_sign_mutation(bool enabled);
bool moment_sign_mutation();
}  // namespace detail

}  // namespace grbf
