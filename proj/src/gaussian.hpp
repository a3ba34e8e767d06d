#pragma once

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <vector>

#include "tensor.hpp"

namespace grbf {

struct NotSpdError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Normalized Gaussian density N(mean, cov). The covariance is validated as
// symmetric positive definite on construction; the Cholesky factor, precision
// and log-determinant are cached.
class Gaussian {
public:
  Gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  const Eigen::MatrixXd& precision() const { return precision_; }
  // Lower-triangular S with S Sᵀ = cov.
  const Eigen::MatrixXd& chol_lower() const { return chol_lower_; }
  double log_det_cov() const { return log_det_cov_; }

  double log_density(const Eigen::VectorXd& x) const;
  double density(const Eigen::VectorXd& x) const;
  // ∇φ(x) = φ(x) · gradient_factor(x) with gradient_factor(x) = C⁻¹(mean − x).
  Eigen::VectorXd gradient_factor(const Eigen::VectorXd& x) const;
  Eigen::VectorXd grad_density(const Eigen::VectorXd& x) const;

private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_lower_;
  Eigen::MatrixXd precision_;
  double log_det_cov_;
};

// A Gaussian density scaled by exp(log_weight); products of normalized
// Gaussians stay in this family.
struct WeightedGaussian {
  double log_weight;
  Gaussian density;
  double weight() const;
};

// Pointwise product of Gaussian densities: Π φ_i = z · φ with a fused mean and
// covariance. The weight is accumulated in the log domain, so widely separated
// factors produce z = 0 rather than NaN.
WeightedGaussian product(std::span<const Gaussian> factors);

// Raw moment tensor E[X ⊗ ... ⊗ X] (k factors) of a Gaussian.
DenseTensor tensor_moment(const Gaussian& g, std::size_t k);

// Nodes and weights for ∫ f(x) e^{-x²} dx ≈ Σ w_k f(x_k); exact for
// polynomials of degree ≤ 2·point_count − 1.
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
GaussHermiteRule hermite_rule(int point_count);

enum class TrigKind { Sin, Cos };
// ∫ trig(freq·x) φ(x) dx for a 1-D Gaussian φ.
double trig_integral(TrigKind kind, double freq, const Gaussian& g);

// Closed-form Gaussian expectations of polynomial forms. These provide
// independent routes to the assembled matrices and are cross-checked against
// them in the tests.

// E[(x−b)ᵀ A (x−a)]
double quadratic_form_expectation(const Gaussian& g, const Eigen::MatrixXd& A,
                                  const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// E[(xᵀ A x) x]
Eigen::VectorXd cubic_form_expectation(const Gaussian& g, const Eigen::MatrixXd& A);

// E[(yᵀ A y)(yᵀ B y)] for y ~ N(0, I)
double quadratic_pair_expectation_standard(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// E[(xᵀ A x)(xᵀ B x)]
double quadratic_pair_expectation(const Gaussian& g, const Eigen::MatrixXd& A,
                                  const Eigen::MatrixXd& B);

// E[((x−c)ᵀ A (x−a)) ((x−d)ᵀ B (x−b))]
double biquadratic_form_expectation(const Gaussian& g, const Eigen::MatrixXd& A,
                                    const Eigen::MatrixXd& B, const Eigen::VectorXd& a,
                                    const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                    const Eigen::VectorXd& d);

}  // namespace grbf
