#include "selftest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "assembly.hpp"
#include "integrals.hpp"
#include "problems.hpp"
#include "rng.hpp"
#include "solver.hpp"
#include "training.hpp"

namespace grbf {
namespace {

struct Check {
  std::ostream& out;
  bool verbose;
  int checks = 0;
  int failures = 0;

  void close(const std::string& what, double got, double want, double tol) {
    ++checks;
    const double scale = std::max({1.0, std::abs(got), std::abs(want)});
    if (std::abs(got - want) <= tol * scale) {
      if (verbose) out << "      ok " << what << "\n";
    } else {
      ++failures;
      out << "      FAIL " << what << ": got " << got << ", want " << want << "\n";
    }
  }

  void require(const std::string& what, bool ok) {
    ++checks;
    if (ok) {
      if (verbose) out << "      ok " << what << "\n";
    } else {
      ++failures;
      out << "      FAIL " << what << "\n";
    }
  }
};

Eigen::MatrixXd random_spd(Rng& rng, int d) {
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = 0.3 * rng.normal();
  return a * a.transpose() + (0.4 + rng.uniform()) * Eigen::MatrixXd::Identity(d, d);
}

Gaussian random_gaussian(Rng& rng, int d) {
  Eigen::VectorXd m(d);
  for (int i = 0; i < d; ++i) m(i) = rng.uniform(-1.0, 1.0);
  return Gaussian(std::move(m), random_spd(rng, d));
}

// E_g[f(X)] through a tensor Gauss-Hermite rule; exact for polynomial f of
// per-variable degree ≤ 2·pts − 1 after standardization.
double gauss_expect(const Gaussian& g, const std::function<double(const Eigen::VectorXd&)>& f,
                    int pts) {
  const GaussHermiteRule rule = hermite_rule(pts);
  const int d = g.dim();
  std::vector<std::size_t> shape(static_cast<std::size_t>(d), static_cast<std::size_t>(pts));
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  Eigen::VectorXd y(d);
  double total = 0.0;
  do {
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      y(k) = rule.nodes(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(k)]));
      w *= rule.weights(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(k)]));
    }
    total += w * f(g.mean() + std::numbers::sqrt2 * (g.chol_lower() * y));
  } while (next_index(shape, idx));
  return total * std::pow(std::numbers::pi, -0.5 * d);
}

double simpson_segment(const std::function<double(double)>& f, double a, double b, double fa,
                       double fm, double fb, double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * eps)
    return left + right + (left + right - whole) / 15.0;
  return simpson_segment(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) +
         simpson_segment(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double eps) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_segment(f, a, b, fa, fm, fb, whole, eps, 40);
}

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void suite_tensor(Check& c) {
  Rng rng(101);

  DenseTensor a({2, 3, 2, 3});
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.uniform(-1.0, 1.0);
  DenseTensor b({3, 3});
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = rng.uniform(-1.0, 1.0);

  DenseTensor r = contract_even(a, b);
  double worst = 0.0;
  for (std::size_t i0 = 0; i0 < 2; ++i0)
    for (std::size_t i2 = 0; i2 < 2; ++i2) {
      double s = 0.0;
      for (std::size_t i1 = 0; i1 < 3; ++i1)
        for (std::size_t i3 = 0; i3 < 3; ++i3) s += a.at({i0, i1, i2, i3}) * b.at({i1, i3});
      worst = std::max(worst, std::abs(r.at({i0, i2}) - s));
    }
  c.close("contract_even vs loops", worst, 0.0, 1e-14);

  DenseTensor t({3, 2, 2, 3});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1.0, 1.0);
  DenseTensor tr = partial_trace(t, 1, 2);
  worst = 0.0;
  for (std::size_t i0 = 0; i0 < 3; ++i0)
    for (std::size_t i3 = 0; i3 < 3; ++i3) {
      double s = 0.0;
      for (std::size_t k = 0; k < 2; ++k) s += t.at({i0, k, k, i3});
      worst = std::max(worst, std::abs(tr.at({i0, i3}) - s));
    }
  c.close("partial_trace vs loops", worst, 0.0, 1e-14);

  const std::size_t dest[4] = {2, 0, 3, 1};
  std::size_t inv[4];
  for (std::size_t m = 0; m < 4; ++m) inv[dest[m]] = m;
  c.close("place_modes round trip", max_abs_diff(place_modes(place_modes(a, dest), inv), a), 0.0,
          0.0);

  const double v[3] = {0.5, -1.25, 2.0};
  DenseTensor v1({3});
  for (std::size_t i = 0; i < 3; ++i) v1[i] = v[i];
  c.close("outer_power vs repeated outer",
          max_abs_diff(outer_power(v, 3), outer(outer(v1, v1), v1)), 0.0, 1e-14);
  c.close("outer_power order 0", outer_power(v, 0).value(), 1.0, 0.0);

  const double u[3] = {1.0, 2.0, -0.5};
  DenseTensor u1({3});
  for (std::size_t i = 0; i < 3; ++i) u1[i] = u[i];
  DenseTensor sym = symmetrize(outer(u1, v1));
  worst = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      worst = std::max(worst, std::abs(sym.at({i, j}) - 0.5 * (u[i] * v[j] + u[j] * v[i])));
  c.close("symmetrize of u⊗v", worst, 0.0, 1e-14);
  c.close("symmetrize idempotent", max_abs_diff(symmetrize(sym), sym), 0.0, 1e-14);
}

void suite_product(Check& c) {
  Rng rng(202);
  for (int d : {1, 2, 3}) {
    std::vector<Gaussian> gs;
    for (int i = 0; i < 3; ++i) gs.push_back(random_gaussian(rng, d));
    const WeightedGaussian all = product(gs);

    double worst = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
      const Eigen::VectorXd x = rng.normal_vector(d);
      double direct = 1.0;
      for (const Gaussian& g : gs) direct *= g.density(x);
      worst = std::max(worst, std::abs(all.weight() * all.density.density(x) - direct) /
                                  std::max(1e-300, direct));
    }
    c.close("pointwise factorization d=" + std::to_string(d), worst, 0.0, 1e-11);

    const WeightedGaussian head = product(std::span<const Gaussian>(gs.data(), 2));
    const std::vector<Gaussian> tail = {head.density, gs[2]};
    const WeightedGaussian stacked = product(tail);
    c.close("stacked log weight d=" + std::to_string(d), head.log_weight + stacked.log_weight,
            all.log_weight, 1e-12);
    c.close("stacked mean d=" + std::to_string(d),
            (stacked.density.mean() - all.density.mean()).norm(), 0.0, 1e-12);

    const WeightedGaussian single = product(std::span<const Gaussian>(gs.data(), 1));
    c.close("single factor weight d=" + std::to_string(d), single.log_weight, 0.0, 0.0);
  }

  const Gaussian n01(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  Eigen::VectorXd m2(1);
  m2 << 2.0;
  const Gaussian n21(m2, Eigen::MatrixXd::Identity(1, 1));
  const std::vector<Gaussian> sep = {n01, n21};
  c.close("z of unit normals two apart", product(sep).weight(), 0.10377687435514868, 1e-14);
  const std::vector<Gaussian> trio = {n01, n01, n01};
  c.close("z of three coincident unit normals", product(trio).weight(),
          1.0 / (2.0 * std::numbers::pi * std::sqrt(3.0)), 1e-14);
}

void suite_agreement(Check& c) {
  Rng rng(303);
  for (int d : {1, 2, 3}) {
    for (int alpha = 0; alpha <= 2; ++alpha) {
      for (int beta = (alpha == 0 ? 1 : 0); beta <= 4; ++beta) {
        for (int rep = 0; rep < 2; ++rep) {
          std::vector<Gaussian> dens, grads;
          for (int i = 0; i < alpha; ++i) dens.push_back(random_gaussian(rng, d));
          for (int i = 0; i < beta; ++i) grads.push_back(random_gaussian(rng, d));
          const DenseTensor via_moments = integral_moment(dens, grads);
          const DenseTensor via_quadrature = integral_gauss_hermite(dens, grads);
          const std::string label = "d=" + std::to_string(d) + " densities=" +
                                    std::to_string(alpha) + " gradients=" + std::to_string(beta) +
                                    " rep=" + std::to_string(rep);
          c.close(label, max_abs_diff(via_moments, via_quadrature), 0.0, 1e-10);
        }
      }
    }
  }

  // A larger rule must not change the quadrature value.
  std::vector<Gaussian> dens = {random_gaussian(rng, 2)};
  std::vector<Gaussian> grads = {random_gaussian(rng, 2), random_gaussian(rng, 2),
                                 random_gaussian(rng, 2)};
  c.close("rule size independence",
          max_abs_diff(integral_gauss_hermite(dens, grads),
                       integral_gauss_hermite(dens, grads, hermite_rule(9))),
          0.0, 1e-12);
}

void suite_moments(Check& c) {
  Rng rng(404);
  for (int d : {1, 2, 3}) {
    const Gaussian g = random_gaussian(rng, d);
    for (std::size_t k = 0; k <= 4; ++k) {
      const DenseTensor claimed = tensor_moment(g, k);
      // Same tensor through quadrature, one sweep accumulating X^⊗k.
      const GaussHermiteRule rule = hermite_rule(3);
      std::vector<std::size_t> shape(static_cast<std::size_t>(d), 3);
      std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
      DenseTensor accum(std::vector<std::size_t>(k, static_cast<std::size_t>(d)));
      Eigen::VectorXd y(d);
      do {
        double w = 1.0;
        for (int q = 0; q < d; ++q) {
          y(q) = rule.nodes(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(q)]));
          w *= rule.weights(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(q)]));
        }
        const Eigen::VectorXd x = g.mean() + std::numbers::sqrt2 * (g.chol_lower() * y);
        accum.add_scaled(outer_power(std::span<const double>(x.data(), x.size()), k), w);
      } while (next_index(shape, idx));
      accum *= std::pow(std::numbers::pi, -0.5 * d);
      c.close("order " + std::to_string(k) + " moment d=" + std::to_string(d),
              max_abs_diff(claimed, accum), 0.0, 1e-12);
    }
  }

  const Gaussian std1(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  c.close("standard fourth moment", tensor_moment(std1, 4).at({0, 0, 0, 0}), 3.0, 1e-14);
  for (int d : {2, 4}) {
    const Gaussian g(Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d));
    const double got = partial_trace(partial_trace(tensor_moment(g, 4), 0, 1), 0, 1).value();
    c.close("E‖x‖⁴ d=" + std::to_string(d), got, static_cast<double>(d * (d + 2)), 1e-13);
  }
}

void suite_oracles(Check& c) {
  Rng rng(505);
  for (int d : {1, 2, 3}) {
    const Gaussian g = random_gaussian(rng, d);
    Eigen::MatrixXd A(d, d), B(d, d);
    Eigen::VectorXd a(d), b(d), e(d), f(d);
    for (int i = 0; i < d; ++i) {
      a(i) = rng.uniform(-1.0, 1.0);
      b(i) = rng.uniform(-1.0, 1.0);
      e(i) = rng.uniform(-1.0, 1.0);
      f(i) = rng.uniform(-1.0, 1.0);
      for (int j = 0; j < d; ++j) {
        A(i, j) = rng.normal();
        B(i, j) = rng.normal();
      }
    }
    const std::string tag = " d=" + std::to_string(d);

    c.close("quadratic form" + tag, quadratic_form_expectation(g, A, a, b),
            gauss_expect(
                g, [&](const Eigen::VectorXd& x) { return (x - b).dot(A * (x - a)); }, 2),
            1e-12);

    const Eigen::VectorXd cubic = cubic_form_expectation(g, A);
    double worst = 0.0;
    for (int i = 0; i < d; ++i) {
      const double want = gauss_expect(
          g, [&](const Eigen::VectorXd& x) { return x.dot(A * x) * x(i); }, 2);
      worst = std::max(worst, std::abs(cubic(i) - want));
    }
    c.close("cubic form" + tag, worst, 0.0, 1e-12);

    c.close("quadratic pair" + tag, quadratic_pair_expectation(g, A, B),
            gauss_expect(
                g, [&](const Eigen::VectorXd& x) { return x.dot(A * x) * x.dot(B * x); }, 3),
            1e-11);

    c.close("biquadratic" + tag, biquadratic_form_expectation(g, A, B, a, b, e, f),
            gauss_expect(
                g,
                [&](const Eigen::VectorXd& x) {
                  return (x - e).dot(A * (x - a)) * (x - f).dot(B * (x - b));
                },
                3),
            1e-11);

    const Gaussian std_g(Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d));
    c.close("standardized pair" + tag, quadratic_pair_expectation_standard(A, B),
            quadratic_pair_expectation(std_g, A, B), 1e-12);
  }

  const Gaussian std1(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  const Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
  c.close("pair oracle fourth moment", quadratic_pair_expectation(std1, one, one), 3.0, 1e-14);
  for (int d : {3, 8}) {
    const Gaussian g(Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d));
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
    c.close("pair oracle E‖x‖⁴ d=" + std::to_string(d), quadratic_pair_expectation(g, id, id),
            static_cast<double>(d * (d + 2)), 1e-13);
  }
}

void suite_trig(Check& c) {
  const Gaussian std1(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  c.close("cos against unit normal", trig_integral(TrigKind::Cos, 1.0, std1),
          std::exp(-0.5), 1e-14);

  struct Case {
    TrigKind kind;
    double freq, mean, sigma;
  };
  const Case cases[] = {{TrigKind::Cos, 3.0, 0.7, 0.9},
                        {TrigKind::Sin, 2.5, -0.3, 1.3},
                        {TrigKind::Sin, 9.42477796076938, 0.5, 0.25},
                        {TrigKind::Cos, 0.5, 4.0, 2.0}};
  for (const Case& cs : cases) {
    Eigen::VectorXd m(1);
    m << cs.mean;
    const Gaussian g(m, Eigen::MatrixXd::Constant(1, 1, cs.sigma * cs.sigma));
    auto integrand = [&](double x) {
      Eigen::VectorXd p(1);
      p << x;
      const double t = cs.freq * x;
      return (cs.kind == TrigKind::Cos ? std::cos(t) : std::sin(t)) * g.density(p);
    };
    const double want =
        adaptive_simpson(integrand, cs.mean - 14.0 * cs.sigma, cs.mean + 14.0 * cs.sigma, 1e-13);
    const std::string label = std::string(cs.kind == TrigKind::Cos ? "cos" : "sin") + " freq " +
                              std::to_string(cs.freq);
    c.close(label, trig_integral(cs.kind, cs.freq, g), want, 1e-9);
  }
}

void suite_forms(Check& c) {
  Rng rng(707);
  for (int d : {2, 3}) {
    std::vector<Gaussian> gs;
    for (int i = 0; i < 4; ++i) gs.push_back(random_gaussian(rng, d));
    const Basis basis(gs, Domain::unbounded(d), false);
    const std::string tag = " d=" + std::to_string(d);

    const int combos[4][4] = {{0, 1, 0, 1}, {0, 1, 2, 3}, {0, 2, 1, 3}, {1, 3, 0, 2}};
    double worst = 0.0;
    for (const auto& q : combos)
      worst = std::max(worst, std::abs(mass1_entry(basis, q[0], q[1], q[2], q[3]) -
                                       one_form_mass_direct(basis, q[0], q[1], q[2], q[3])));
    c.close("pair mass vs direct" + tag, worst, 0.0, 1e-10);

    c.close("pair mass antisymmetry (i,j)" + tag,
            mass1_entry(basis, 0, 2, 1, 3) + mass1_entry(basis, 2, 0, 1, 3), 0.0, 1e-12);
    c.close("pair mass antisymmetry (a,b)" + tag,
            mass1_entry(basis, 0, 2, 1, 3) + mass1_entry(basis, 0, 2, 3, 1), 0.0, 1e-12);
    c.close("mixed pairing antisymmetry" + tag,
            mixed_d0_entry(basis, 1, 0, 2) + mixed_d0_entry(basis, 1, 2, 0), 0.0, 1e-12);

    const Eigen::MatrixXd m1 = assemble_mass1(basis);
    c.close("assembled pair mass symmetric" + tag, (m1 - m1.transpose()).cwiseAbs().maxCoeff(),
            0.0, 1e-12);
    const auto pairs = pair_index_list(basis);
    worst = 0.0;
    for (std::size_t p = 0; p < pairs.size(); ++p)
      for (std::size_t q = 0; q < pairs.size(); ++q)
        worst = std::max(
            worst, std::abs(m1(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) -
                            mass1_entry(basis, pairs[p].first, pairs[p].second, pairs[q].first,
                                        pairs[q].second)));
    c.close("assembled pair mass vs entries" + tag, worst, 0.0, 1e-12);
  }

  std::vector<Gaussian> gs;
  for (int i = 0; i < 4; ++i) gs.push_back(random_gaussian(rng, 3));
  const Basis basis(gs, Domain::unbounded(3), false);

  const int combos[3][6] = {{0, 1, 2, 0, 1, 2}, {0, 1, 2, 0, 1, 3}, {0, 1, 3, 1, 2, 3}};
  double worst = 0.0;
  for (const auto& q : combos)
    worst = std::max(worst,
                     std::abs(mass2_entry(basis, q[0], q[1], q[2], q[3], q[4], q[5]) -
                              two_form_mass_direct(basis, q[0], q[1], q[2], q[3], q[4], q[5])));
  c.close("triple mass vs direct", worst, 0.0, 1e-10);

  c.close("triple mass swap sign",
          mass2_entry(basis, 0, 1, 2, 0, 1, 3) + mass2_entry(basis, 0, 1, 2, 1, 0, 3), 0.0,
          1e-12);
  c.close("triple mass cyclic",
          mass2_entry(basis, 0, 1, 2, 0, 1, 3) - mass2_entry(basis, 0, 1, 2, 1, 3, 0), 0.0,
          1e-12);
  c.close("derivative pairing swap (i,j)",
          mixed_d1_entry(basis, 0, 1, 0, 1, 2) + mixed_d1_entry(basis, 1, 0, 0, 1, 2), 0.0,
          1e-12);
  c.close("derivative pairing swap (a,b,c)",
          mixed_d1_entry(basis, 0, 1, 0, 1, 2) + mixed_d1_entry(basis, 0, 1, 1, 0, 2), 0.0,
          1e-12);
}

void suite_constant(Check& c) {
  Rng rng(808);
  std::vector<Gaussian> gs;
  for (int i = 0; i < 3; ++i) gs.push_back(random_gaussian(rng, 3));
  const Domain box = Domain::box(Eigen::VectorXd::Constant(3, -2.0),
                                 Eigen::VectorXd::Constant(3, 2.0));
  const Basis with_const(gs, box, true);
  const Basis plain(gs, box, false);
  const int n = 3;

  double worst = 0.0;
  for (int rep = 0; rep < 3; ++rep) {
    const Eigen::VectorXd x = rng.normal_vector(3);
    for (int u = 1; u <= n; ++u)
      worst = std::max(worst, (with_const.eval_pair_form(0, u, x) -
                               with_const.eval_zero_form_grad(u, x))
                                  .norm());
  }
  c.close("pair with constant is a gradient", worst, 0.0, 1e-13);

  worst = 0.0;
  for (int i = 1; i <= n; ++i)
    for (int b = 1; b <= n; ++b)
      worst = std::max(worst, std::abs(mixed_d0_entry(with_const, i, 0, b) -
                                       stiffness0_entry(with_const, i, b)));
  c.close("derivative pairing against constant pairs", worst, 0.0, 1e-12);

  worst = 0.0;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      worst = std::max(worst, std::abs(mass1_entry(with_const, 0, i, 0, j) -
                                       stiffness0_entry(with_const, i, j)));
  c.close("pair mass of two gradients", worst, 0.0, 1e-12);

  const Eigen::MatrixXd s0 = assemble_stiffness0(with_const);
  c.close("constant has zero stiffness", s0.row(0).cwiseAbs().maxCoeff(), 0.0, 0.0);
  c.close("constant mass is the volume", assemble_mass0(with_const)(0, 0), box.volume(), 1e-14);

  const AugmentedOneForm aug = assemble_augmented(s0, assemble_mixed_d0(with_const),
                                                  assemble_mass1(with_const), true);
  c.close("augmented mass equals full pair mass",
          (aug.mass - assemble_mass1(with_const)).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  c.close("augmented top-left is the Gaussian stiffness",
          (aug.mass.topLeftCorner(n, n) - assemble_stiffness0(plain)).cwiseAbs().maxCoeff(), 0.0,
          1e-12);

  worst = 0.0;
  for (int i = 1; i <= n; ++i)
    worst = std::max(worst, std::abs(mixed_d1_entry(with_const, 0, i, 1, 2, 3)));
  c.close("exact pairs have zero derivative", worst, 0.0, 1e-12);
}

void suite_solver(Check& c) {
  Rng rng(909);
  const int n = 5;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  const Eigen::MatrixXd lhs = a * a.transpose() + Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd rhs = rng.normal_vector(n);

  const LeastSquaresResult sol = solve_least_squares(lhs, rhs);
  c.close("full-rank residual", (lhs * sol.x - rhs).norm(), 0.0, 1e-10);
  c.require("condition number at least one", sol.kappa >= 1.0);
  c.require("full rank detected", sol.rank == n);

  Eigen::MatrixXd deficient = lhs;
  deficient.col(n - 1) = deficient.col(n - 2);
  const Eigen::VectorXd consistent = deficient * rng.normal_vector(n);
  const LeastSquaresResult min_norm = solve_least_squares(deficient, consistent);
  c.close("rank-deficient residual", (deficient * min_norm.x - consistent).norm(), 0.0, 1e-9);
  c.require("rank drop detected", min_norm.rank == n - 1);
  Eigen::VectorXd null_dir = Eigen::VectorXd::Zero(n);
  null_dir(n - 2) = 1.0;
  null_dir(n - 1) = -1.0;
  c.close("solution orthogonal to the null space", min_norm.x.dot(null_dir), 0.0, 1e-10);

  Eigen::PermutationMatrix<Eigen::Dynamic> perm(n);
  perm.setIdentity();
  std::swap(perm.indices()(0), perm.indices()(3));
  std::swap(perm.indices()(1), perm.indices()(4));
  const Eigen::MatrixXd plhs = perm * lhs * perm.transpose();
  const Eigen::VectorXd prhs = perm * rhs;
  c.close("permutation equivariance",
          (solve_least_squares(plhs, prhs).x - perm * sol.x).norm(), 0.0, 1e-10);

  bool threw = false;
  try {
    solve_least_squares(Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Ones(2));
  } catch (const SingularError&) {
    threw = true;
  }
  c.require("zero system is rejected", threw);
}

void suite_training(Check& c) {
  Rng rng(1010);
  {
    std::vector<Gaussian> gs;
    for (int i = 0; i < 2; ++i) gs.push_back(random_gaussian(rng, 3));
    const Basis basis(gs, Domain::unbounded(3), false);
    const Eigen::VectorXd theta = pack_parameters(basis, false);
    const std::vector<Gaussian> back = unpack_gaussians(theta, 2, 3, false);
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
      worst = std::max(worst, (back[static_cast<std::size_t>(i)].mean() -
                               gs[static_cast<std::size_t>(i)].mean())
                                  .norm());
      worst = std::max(worst, (back[static_cast<std::size_t>(i)].cov() -
                               gs[static_cast<std::size_t>(i)].cov())
                                  .cwiseAbs()
                                  .maxCoeff());
    }
    c.close("full-covariance round trip", worst, 0.0, 1e-12);
  }
  {
    Eigen::VectorXd m(2);
    m << 0.3, -0.8;
    std::vector<Gaussian> gs = {Gaussian(m, 2.25 * Eigen::MatrixXd::Identity(2, 2))};
    const Basis basis(gs, Domain::unbounded(2), false);
    const Eigen::VectorXd theta = pack_parameters(basis, true);
    c.require("isotropic block size", theta.size() == 3);
    const std::vector<Gaussian> back = unpack_gaussians(theta, 1, 2, true);
    c.close("isotropic round trip", (back[0].cov() - gs[0].cov()).cwiseAbs().maxCoeff(), 0.0,
            1e-12);
  }

  const auto cache_consistent = [&](int problem_id, const std::string& tag) {
    const ProblemSpec spec = make_problem(problem_id);
    const int n = 3;
    const Dataset data = sample_data(spec, 48, 5);
    const Eigen::VectorXd theta0 = pack_parameters(init_basis(spec, n, 7), spec.train.isotropic);

    LossEvaluator warm(spec, data, n, spec.train.isotropic);
    const double l0 = warm.eval(theta0).loss;

    Eigen::VectorXd theta1 = theta0;
    theta1(theta1.size() / 2) += 0.01;
    const double l1 = warm.eval(theta1).loss;
    const double l0_again = warm.eval(theta0).loss;

    LossEvaluator fresh(spec, data, n, spec.train.isotropic);
    c.close("cache round trip " + tag, l0_again, l0, 1e-13);
    c.close("incremental vs fresh " + tag, fresh.eval(theta1).loss, l1, 1e-12);
  };
  cache_consistent(1, "unbounded");
  cache_consistent(2, "penalized");
  cache_consistent(4, "mixed");

  {
    const ProblemSpec spec = make_problem(1);
    const Dataset data = sample_data(spec, 48, 5);
    const Eigen::VectorXd theta = pack_parameters(init_basis(spec, 3, 11), false);
    LossEvaluator loss(spec, data, 3, false);
    const int block = parameter_block_size(spec.dim, false);
    Eigen::VectorXd swapped = theta;
    swapped.segment(0, block).swap(swapped.segment(2 * block, block));
    c.close("loss is order invariant", LossEvaluator(spec, data, 3, false).eval(swapped).loss,
            loss.eval(theta).loss, 1e-11);
  }
}

struct Suite {
  const char* name;
  void (*fn)(Check&);
};

constexpr Suite kSuites[] = {
    {"tensor-algebra", suite_tensor},
    {"product-lemma", suite_product},
    {"moment-quadrature-agreement", suite_agreement},
    {"gaussian-moments", suite_moments},
    {"expectation-oracles", suite_oracles},
    {"trig-integrals", suite_trig},
    {"form-oracles", suite_forms},
    {"constant-zero-form", suite_constant},
    {"least-squares", suite_solver},
    {"training-cache", suite_training},
};

}  // namespace

SelfTestSummary run_selftest(const SelfTestOptions& options, std::ostream& out) {
  struct MutationGuard {
    explicit MutationGuard(bool on) { detail::set_moment_sign_mutation(on); }
    ~MutationGuard() { detail::set_moment_sign_mutation(false); }
  } guard(options.mutate);

  SelfTestSummary summary;
  for (const Suite& suite : kSuites) {
    if (!options.suite_filter.empty() &&
        std::string_view(suite.name).find(options.suite_filter) == std::string_view::npos)
      continue;
    Check check{out, options.verbose};
    try {
      suite.fn(check);
    } catch (const std::exception& e) {
      ++check.failures;
      out << "      FAIL " << suite.name << " threw: " << e.what() << "\n";
    }
    ++summary.suites;
    summary.checks += check.checks;
    summary.failures += check.failures;
    if (check.failures == 0)
      out << "  ok     " << suite.name << " (" << check.checks << " checks)\n";
    else
      out << "  FAILED " << suite.name << " (" << check.failures << " of " << check.checks
          << " checks)\n";
  }
  out << "selftest: " << summary.suites << " suites, " << summary.checks << " checks, "
      << summary.failures << " failures\n";
  return summary;
}

}  // namespace grbf
