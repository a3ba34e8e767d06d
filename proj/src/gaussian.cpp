#include "gaussian.hpp"

#include <cmath>
#include <numbers>

namespace grbf {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

Eigen::MatrixXd validated_cholesky(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols() || cov.rows() == 0)
    throw NotSpdError("covariance must be square and non-empty");
  const double scale = cov.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw NotSpdError("covariance must be finite and nonzero");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw NotSpdError("covariance is not symmetric");

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NotSpdError("covariance is not positive definite");
  Eigen::MatrixXd lower = llt.matrixL();
  const double pivot_tol = 1e-12 * cov.diagonal().maxCoeff();
  for (int i = 0; i < lower.rows(); ++i)
    if (!(lower(i, i) * lower(i, i) > pivot_tol))
      throw NotSpdError("covariance is numerically singular");
  return lower;
}

unsigned long long binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  unsigned long long r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// (2j)! / (j! 2^j) = (2j−1)!!, the number of pairings of 2j elements.
unsigned long long pairing_count(unsigned j) {
  unsigned long long r = 1;
  for (unsigned i = 1; i < 2 * j; i += 2) r *= i;
  return r;
}

}  // namespace

Gaussian::Gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (mean_.size() != cov_.rows())
    throw DimensionError("mean and covariance dimensions differ");
  chol_lower_ = validated_cholesky(cov_);
  const int d = dim();
  precision_ = chol_lower_.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(d, d));
  precision_ = chol_lower_.transpose().triangularView<Eigen::Upper>().solve(precision_);
  precision_ = 0.5 * (precision_ + precision_.transpose().eval());
  log_det_cov_ = 2.0 * chol_lower_.diagonal().array().log().sum();
}

double Gaussian::log_density(const Eigen::VectorXd& x) const {
  if (x.size() != mean_.size()) throw DimensionError("point dimension mismatch");
  Eigen::VectorXd w = chol_lower_.triangularView<Eigen::Lower>().solve(x - mean_);
  return -0.5 * (dim() * kLog2Pi + log_det_cov_ + w.squaredNorm());
}

double Gaussian::density(const Eigen::VectorXd& x) const { return std::exp(log_density(x)); }

Eigen::VectorXd Gaussian::gradient_factor(const Eigen::VectorXd& x) const {
  if (x.size() != mean_.size()) throw DimensionError("point dimension mismatch");
  return precision_ * (mean_ - x);
}

Eigen::VectorXd Gaussian::grad_density(const Eigen::VectorXd& x) const {
  return density(x) * gradient_factor(x);
}

double WeightedGaussian::weight() const { return std::exp(log_weight); }

WeightedGaussian product(std::span<const Gaussian> factors) {
  if (factors.empty()) throw std::invalid_argument("product of zero Gaussians");
  const int d = factors[0].dim();
  for (const Gaussian& g : factors)
    if (g.dim() != d) throw DimensionError("product factors have mixed dimensions");
  const std::size_t n = factors.size();
  if (n == 1) return {0.0, factors[0]};

  Eigen::MatrixXd fused_precision = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(d);
  double sum_log_det = 0.0;
  double sum_quad = 0.0;
  for (const Gaussian& g : factors) {
    fused_precision += g.precision();
    Eigen::VectorXd pm = g.precision() * g.mean();
    eta += pm;
    sum_log_det += g.log_det_cov();
    sum_quad += g.mean().dot(pm);
  }

  Eigen::LLT<Eigen::MatrixXd> llt(fused_precision);
  if (llt.info() != Eigen::Success)
    throw NotSpdError("fused precision is not positive definite");
  Eigen::MatrixXd lower = llt.matrixL();
  const double log_det_fused_cov = -2.0 * lower.diagonal().array().log().sum();
  Eigen::VectorXd mean = llt.solve(eta);
  Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(d, d));
  cov = 0.5 * (cov + cov.transpose().eval());

  const double log_weight = -0.5 * static_cast<double>(n - 1) * d * kLog2Pi +
                            0.5 * (log_det_fused_cov - sum_log_det) -
                            0.5 * (sum_quad - eta.dot(mean));
  return {log_weight, Gaussian(std::move(mean), std::move(cov))};
}

DenseTensor tensor_moment(const Gaussian& g, std::size_t k) {
  const std::size_t d = static_cast<std::size_t>(g.dim());
  if (k == 0) return DenseTensor::scalar(1.0);

  DenseTensor cov_t(std::vector<std::size_t>{d, d});
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) cov_t.at({i, j}) = g.cov()(i, j);
  std::span<const double> mean_view(g.mean().data(), d);

  DenseTensor result(std::vector<std::size_t>(k, d));
  for (std::size_t j = 0; 2 * j <= k; ++j) {
    DenseTensor term = outer_power(mean_view, k - 2 * j);
    for (std::size_t c = 0; c < j; ++c) term = outer(term, cov_t);
    const double coeff = static_cast<double>(binomial(static_cast<unsigned>(k), 2 * j) *
                                             pairing_count(static_cast<unsigned>(j)));
    result.add_scaled(symmetrize(term), coeff);
  }
  return result;
}

GaussHermiteRule hermite_rule(int point_count) {
  if (point_count < 1) throw std::invalid_argument("hermite_rule needs at least one point");
  const int n = point_count;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n > 1 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(0.5 * k);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("hermite_rule eigen decomposition failed");

  GaussHermiteRule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights.resize(n);
  const double mu0 = std::sqrt(std::numbers::pi);
  for (int k = 0; k < n; ++k) {
    const double v = solver.eigenvectors()(0, k);
    rule.weights(k) = mu0 * v * v;
  }
  return rule;
}

double trig_integral(TrigKind kind, double freq, const Gaussian& g) {
  if (g.dim() != 1) throw DimensionError("trig_integral is one-dimensional");
  const double mu = g.mean()(0);
  const double var = g.cov()(0, 0);
  const double damp = std::exp(-0.5 * freq * freq * var);
  return kind == TrigKind::Sin ? std::sin(freq * mu) * damp : std::cos(freq * mu) * damp;
}

double quadratic_form_expectation(const Gaussian& g, const Eigen::MatrixXd& A,
                                  const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const int d = g.dim();
  if (A.rows() != d || A.cols() != d || a.size() != d || b.size() != d)
    throw DimensionError("quadratic form dimension mismatch");
  const Eigen::VectorXd& m = g.mean();
  return A.cwiseProduct(g.cov()).sum() + (m - b).dot(A * (m - a));
}

Eigen::VectorXd cubic_form_expectation(const Gaussian& g, const Eigen::MatrixXd& A) {
  const int d = g.dim();
  if (A.rows() != d || A.cols() != d) throw DimensionError("cubic form dimension mismatch");
  const Eigen::VectorXd& m = g.mean();
  const Eigen::MatrixXd& C = g.cov();
  return A.cwiseProduct(C).sum() * m + C * (A + A.transpose()) * m + m.dot(A * m) * m;
}

double quadratic_pair_expectation_standard(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
    throw DimensionError("quadratic pair dimension mismatch");
  return (A + A.transpose()).cwiseProduct(B).sum() + A.trace() * B.trace();
}

double quadratic_pair_expectation(const Gaussian& g, const Eigen::MatrixXd& A,
                                  const Eigen::MatrixXd& B) {
  const int d = g.dim();
  if (A.rows() != d || A.cols() != d || B.rows() != d || B.cols() != d)
    throw DimensionError("quadratic pair dimension mismatch");
  const Eigen::MatrixXd As = 0.5 * (A + A.transpose());
  const Eigen::MatrixXd Bs = 0.5 * (B + B.transpose());
  const Eigen::MatrixXd& S = g.chol_lower();
  const Eigen::VectorXd& m = g.mean();
  const Eigen::MatrixXd At = S.transpose() * As * S;
  const Eigen::MatrixXd Bt = S.transpose() * Bs * S;
  const double a0 = m.dot(As * m);
  const double b0 = m.dot(Bs * m);
  return a0 * b0 + a0 * Bt.trace() + b0 * At.trace() +
         4.0 * (As * m).dot(g.cov() * (Bs * m)) + quadratic_pair_expectation_standard(At, Bt);
}

double biquadratic_form_expectation(const Gaussian& g, const Eigen::MatrixXd& A,
                                    const Eigen::MatrixXd& B, const Eigen::VectorXd& a,
                                    const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                    const Eigen::VectorXd& d) {
  const int n = g.dim();
  if (A.rows() != n || A.cols() != n || B.rows() != n || B.cols() != n || a.size() != n ||
      b.size() != n || c.size() != n || d.size() != n)
    throw DimensionError("biquadratic form dimension mismatch");
  const Eigen::VectorXd& m = g.mean();
  const Eigen::MatrixXd& C = g.cov();
  const Eigen::MatrixXd M2 = C + m * m.transpose();
  const Eigen::VectorXd tA = cubic_form_expectation(g, A);
  const Eigen::VectorXd tB = cubic_form_expectation(g, B);
  const double trAC = A.cwiseProduct(C).sum();
  const double trBC = B.cwiseProduct(C).sum();
  const double S = c.dot(A * a);
  const double Y = d.dot(B * b);

  double r = quadratic_pair_expectation(g, A, B);
  r -= (B * b + B.transpose() * d).dot(tA);
  r -= (A * a + A.transpose() * c).dot(tB);
  r += (trAC + m.dot(A * m)) * Y + S * (trBC + m.dot(B * m));
  r += (A * a).dot(M2 * (B * b)) + (A * a).dot(M2 * (B.transpose() * d)) +
       (A.transpose() * c).dot(M2 * (B * b)) + (A.transpose() * c).dot(M2 * (B.transpose() * d));
  r -= m.dot(A * a) * Y + c.dot(A * m) * Y + S * (m.dot(B * b) + d.dot(B * m));
  r += S * Y;
  return r;
}

}  // namespace grbf
