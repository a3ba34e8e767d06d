#include "problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "integrals.hpp"
#include "rng.hpp"

namespace grbf {

namespace {

constexpr double kPi = std::numbers::pi;

double moment1d(const Gaussian& g, std::size_t k) { return tensor_moment(g, k)[0]; }

// ⟨p(x) e^{−x²/2}, φ⟩ for a 1-D polynomial with ascending coefficients:
// e^{−x²/2} is √(2π) times the standard normal density, so the pairing is
// √(2π) z E[p] under the fused product Gaussian.
double poly_envelope_inner_1d(const std::vector<double>& coeffs, const Gaussian& phi) {
  const Gaussian std_normal(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  const Gaussian factors[2] = {std_normal, phi};
  const WeightedGaussian fused = product(factors);
  double e = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k)
    if (coeffs[k] != 0.0) e += coeffs[k] * moment1d(fused.density, k);
  return std::sqrt(2.0 * kPi) * fused.weight() * e;
}

ProblemSpec problem1() {
  ProblemSpec p;
  p.id = 1;
  p.dim = 1;
  p.domain = Domain::unbounded(1);
  p.sample_lo = Eigen::VectorXd::Constant(1, -6.0);
  p.sample_hi = Eigen::VectorXd::Constant(1, 6.0);
  p.init_lo = -6.0;
  p.init_hi = 6.0;
  p.exact = [](const Eigen::VectorXd& x) {
    const double t = x(0);
    return t * (2.0 - t) * std::exp(-0.5 * t * t);
  };
  p.forcing.dim = 1;
  p.forcing.value = [](const Eigen::VectorXd& x) {
    const double t = x(0);
    return std::exp(-0.5 * t * t) *
           (t * t * t * t - 2.0 * t * t * t - 5.0 * t * t + 6.0 * t + 2.0);
  };
  p.forcing.inner_with_gaussian = [](const Gaussian& phi) {
    return poly_envelope_inner_1d({2.0, 6.0, -5.0, -2.0, 1.0}, phi);
  };
  p.train = {1000, 0.01, false, 4096};
  return p;
}

ProblemSpec problem2() {
  ProblemSpec p;
  p.id = 2;
  p.dim = 1;
  p.domain = Domain::box(Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0));
  // Data is drawn from a band wider than the domain so the boundary points are
  // well resolved, but errors are graded on the domain itself: outside it the
  // boundary-value problem says nothing, and the computed solution drifts there.
  p.sample_lo = Eigen::VectorXd::Constant(1, -2.0);
  p.sample_hi = Eigen::VectorXd::Constant(1, 2.0);
  p.eval_lo = p.domain.lo;
  p.eval_hi = p.domain.hi;
  p.init_lo = -2.0;
  p.init_hi = 2.0;
  const double k = 3.0 * kPi;
  p.exact = [k](const Eigen::VectorXd& x) { return std::sin(k * x(0)); };
  p.boundary_value = [](const Eigen::VectorXd&) { return 0.0; };
  p.forcing.dim = 1;
  p.forcing.value = [k](const Eigen::VectorXd& x) { return k * k * std::sin(k * x(0)); };
  p.forcing.inner_with_gaussian = [k](const Gaussian& phi) {
    return k * k * trig_integral(TrigKind::Sin, k, phi);
  };
  p.forcing.domain_integral = []() { return 0.0; };  // odd over the box
  p.train = {1000, 0.01, false, 4096};
  return p;
}

ProblemSpec problem3() {
  constexpr int d = 8;
  ProblemSpec p;
  p.id = 3;
  p.dim = d;
  p.domain = Domain::unbounded(d);
  p.sample_lo = Eigen::VectorXd::Constant(d, -2.0);
  p.sample_hi = Eigen::VectorXd::Constant(d, 2.0);
  p.exact = [](const Eigen::VectorXd& x) {
    const double q = x.squaredNorm();
    const double s = x.sum();
    return std::exp(-0.5 * q) * (2.0 * s - q);
  };
  p.forcing.dim = d;
  p.forcing.value = [](const Eigen::VectorXd& x) {
    const double q = x.squaredNorm();
    const double s = x.sum();
    return std::exp(-0.5 * q) *
           (2.0 * d + 4.0 * s - 4.0 * q - (2.0 * s - q) * (q - d));
  };
  p.forcing.inner_with_gaussian = [](const Gaussian& phi) {
    const Gaussian std_normal(Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d));
    const Gaussian factors[2] = {std_normal, phi};
    const WeightedGaussian fused = product(factors);
    const Gaussian& g = fused.density;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(d);
    const double es = ones.dot(g.mean());
    const double eq = quadratic_form_expectation(g, id, zero, zero);
    const double esq = ones.dot(cubic_form_expectation(g, id));
    const double eqq = quadratic_pair_expectation(g, id, id);
    // E[(2s − q)(q − d)] = 2 E[sq] − 2d E[s] − E[q²] + d E[q]
    const double cross = 2.0 * esq - 2.0 * d * es - eqq + d * eq;
    const double e = 2.0 * d + 4.0 * es - 4.0 * eq - cross;
    return std::pow(2.0 * kPi, 0.5 * d) * fused.weight() * e;
  };
  p.train = {2000, 0.05, true, 4096};
  return p;
}

ProblemSpec problem4() {
  constexpr int d = 3;
  ProblemSpec p;
  p.id = 4;
  p.dim = d;
  p.mixed = true;
  p.domain = Domain::unbounded(d);
  p.sample_lo = Eigen::VectorXd::Constant(d, -1.5);
  p.sample_hi = Eigen::VectorXd::Constant(d, 2.5);

  const Eigen::VectorXd center = Eigen::VectorXd::Constant(d, 0.5);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(d);
  // e^{−‖x−c‖²} = π^{3/2} N(c, I/2)
  const double envelope_weight = std::pow(kPi, 1.5);
  const Gaussian envelope(center, 0.5 * Eigen::MatrixXd::Identity(d, d));

  p.exact = [](const Eigen::VectorXd&) { return 0.0; };
  p.exact_vector = [center, ones](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return std::exp(-(x - center).squaredNorm()) * ones;
  };

  p.forcing.dim = d;
  p.forcing.value = [center](const Eigen::VectorXd& x) {
    return std::exp(-(x - center).squaredNorm()) * (3.0 - 2.0 * x.sum());
  };
  p.forcing.inner_with_gaussian = [envelope, envelope_weight, ones](const Gaussian& phi) {
    const Gaussian factors[2] = {envelope, phi};
    const WeightedGaussian fused = product(factors);
    return envelope_weight * fused.weight() * (3.0 - 2.0 * ones.dot(fused.density.mean()));
  };

  VectorFieldTerm g_field;
  g_field.dim = d;
  g_field.value = p.exact_vector;
  g_field.pair_inner = [envelope, envelope_weight, ones](const Basis& basis, int a, int b) {
    return envelope_pair_inner(basis, envelope, ones, envelope_weight, a, b);
  };
  g_field.gradient_inner = [envelope, envelope_weight, ones](const Basis& basis, int i) {
    return envelope_gradient_inner(basis, envelope, ones, envelope_weight, i);
  };
  p.vector_forcing = g_field;
  p.train = {500, 0.01, true, 4096};
  return p;
}

}  // namespace

ProblemSpec make_problem(int id) {
  ProblemSpec p;
  switch (id) {
    case 1: p = problem1(); break;
    case 2: p = problem2(); break;
    case 3: p = problem3(); break;
    case 4: p = problem4(); break;
    default: throw std::invalid_argument("unknown problem id");
  }
  if (p.eval_lo.size() == 0) {
    p.eval_lo = p.sample_lo;
    p.eval_hi = p.sample_hi;
  }
  return p;
}

Dataset sample_data(const ProblemSpec& spec, int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample count must be positive");
  Rng rng(seed);
  Dataset data;
  data.points.resize(count, spec.dim);
  data.values.resize(count);
  if (spec.mixed) data.vector_values.resize(count, spec.dim);
  for (int r = 0; r < count; ++r) {
    const Eigen::VectorXd x = rng.uniform_vector(spec.sample_lo, spec.sample_hi);
    data.points.row(r) = x.transpose();
    data.values(r) = spec.exact(x);
    if (spec.mixed) data.vector_values.row(r) = spec.exact_vector(x).transpose();
  }
  return data;
}

Eigen::MatrixXd evaluation_points(const ProblemSpec& spec, int count, std::uint64_t seed) {
  if (count < 2) throw std::invalid_argument("need at least two evaluation points");
  Eigen::MatrixXd pts(count, spec.dim);
  if (spec.dim == 1) {
    const double lo = spec.eval_lo(0), hi = spec.eval_hi(0);
    for (int r = 0; r < count; ++r)
      pts(r, 0) = lo + (hi - lo) * static_cast<double>(r) / (count - 1);
    return pts;
  }
  Rng rng(seed);
  for (int r = 0; r < count; ++r)
    pts.row(r) = rng.uniform_vector(spec.eval_lo, spec.eval_hi).transpose();
  return pts;
}

Basis init_basis(const ProblemSpec& spec, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("basis size must be positive");
  std::vector<Gaussian> gs;
  gs.reserve(static_cast<std::size_t>(n));

  if (spec.dim == 1) {
    const double width = spec.init_hi - spec.init_lo;
    const double sigma = width / n;
    const Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(1, 1, sigma * sigma);
    for (int i = 0; i < n; ++i) {
      const double m = (n == 1) ? 0.5 * (spec.init_lo + spec.init_hi)
                                : spec.init_lo + width * static_cast<double>(i) / (n - 1);
      gs.emplace_back(Eigen::VectorXd::Constant(1, m), cov);
    }
    return Basis(std::move(gs), spec.domain, false);
  }

  Rng rng(seed);
  const Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(spec.dim, spec.dim);
  if (spec.id == 4) {
    // The mixed benchmark's field is a single pair form of unit Gaussians
    // centered at 0 and at the all-ones point, so the cloud brackets those two
    // centers: means alternate between them with quarter-scale jitter.
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd shift = (i % 2 == 0) ? Eigen::VectorXd::Zero(spec.dim)
                                                 : Eigen::VectorXd::Ones(spec.dim);
      gs.emplace_back(shift + 0.25 * rng.normal_vector(spec.dim), cov);
    }
  } else {
    for (int i = 0; i < n; ++i) gs.emplace_back(rng.normal_vector(spec.dim), cov);
  }
  return Basis(std::move(gs), spec.domain, false);
}

}  // namespace grbf
