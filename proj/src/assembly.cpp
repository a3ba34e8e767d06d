#include "assembly.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "rng.hpp"

namespace grbf {

namespace {

// Trace over the first two and the remaining two modes of an order-4 tensor.
double double_trace(const DenseTensor& t) {
  return partial_trace(partial_trace(t, 0, 1), 0, 1).value();
}

double trace2(const DenseTensor& t) { return partial_trace(t, 0, 1).value(); }

constexpr int kCyclic3[3][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}};

}  // namespace

DenseTensor form_integral(const Basis& basis, std::span<const int> density_idx,
                          std::span<const int> gradient_idx) {
  const std::size_t d = static_cast<std::size_t>(basis.dim());
  for (int j : gradient_idx)
    if (basis.is_constant_index(j))
      return DenseTensor(std::vector<std::size_t>(gradient_idx.size(), d));

  std::vector<Gaussian> densities;
  for (int i : density_idx)
    if (!basis.is_constant_index(i)) densities.push_back(basis.gaussian_at(i));
  std::vector<Gaussian> gradients;
  for (int j : gradient_idx) gradients.push_back(basis.gaussian_at(j));

  if (densities.empty() && gradients.empty())
    throw std::invalid_argument("form integral with only constant factors diverges");
  return integral_moment(densities, gradients);
}

double mass0_entry(const Basis& basis, int u, int v) {
  const bool cu = basis.is_constant_index(u), cv = basis.is_constant_index(v);
  if (cu && cv) return basis.domain().volume();
  if (cu || cv) return 1.0;  // ∫ φ over the whole space
  const int idx[2] = {u, v};
  return form_integral(basis, idx, {}).value();
}

double stiffness0_entry(const Basis& basis, int u, int v) {
  if (basis.is_constant_index(u) || basis.is_constant_index(v)) return 0.0;
  const int grads[2] = {u, v};
  return trace2(form_integral(basis, {}, grads));
}

double mixed_d0_entry(const Basis& basis, int i, int a, int b) {
  if (basis.is_constant_index(i) || a == b) return 0.0;
  double r = 0.0;
  {
    const int dens[1] = {a};
    const int grads[2] = {b, i};
    r += trace2(form_integral(basis, dens, grads));
  }
  {
    const int dens[1] = {b};
    const int grads[2] = {a, i};
    r -= trace2(form_integral(basis, dens, grads));
  }
  return r;
}

double mass1_entry(const Basis& basis, int i, int j, int a, int b) {
  if (i == j || a == b) return 0.0;  // a repeated index kills the pair form
  auto term = [&](int p, int q, int r, int s) {
    const int dens[2] = {p, q};
    const int grads[2] = {r, s};
    return trace2(form_integral(basis, dens, grads));
  };
  return term(i, a, j, b) - term(i, b, j, a) - term(j, a, i, b) + term(j, b, i, a);
}

double mass2_entry(const Basis& basis, int i, int j, int k, int a, int b, int c) {
  if (i == j || j == k || i == k || a == b || b == c || a == c) return 0.0;
  const int left[3] = {i, j, k};
  const int right[3] = {a, b, c};
  double acc = 0.0;
  for (const auto& cl : kCyclic3) {
    const int p = left[cl[0]], q = left[cl[1]], r = left[cl[2]];
    for (const auto& cr : kCyclic3) {
      const int s = right[cr[0]], t = right[cr[1]], u = right[cr[2]];
      const int dens[2] = {p, s};
      const int grads_plus[4] = {q, t, r, u};
      const int grads_minus[4] = {q, u, r, t};
      acc += double_trace(form_integral(basis, dens, grads_plus));
      acc -= double_trace(form_integral(basis, dens, grads_minus));
    }
  }
  return acc;
}

double mixed_d1_entry(const Basis& basis, int i, int j, int a, int b, int c) {
  if (i == j || a == b || b == c || a == c) return 0.0;
  const int right[3] = {a, b, c};
  double acc = 0.0;
  for (const auto& cr : kCyclic3) {
    const int s = right[cr[0]], t = right[cr[1]], u = right[cr[2]];
    const int dens[1] = {s};
    const int grads_plus[4] = {i, t, j, u};
    const int grads_minus[4] = {i, u, j, t};
    acc += double_trace(form_integral(basis, dens, grads_plus));
    acc -= double_trace(form_integral(basis, dens, grads_minus));
  }
  return 2.0 * acc;
}

Eigen::MatrixXd assemble_mass0(const Basis& basis) {
  const int n = basis.zero_form_count();
  Eigen::MatrixXd m(n, n);
  for (int u = 0; u < n; ++u)
    for (int v = u; v < n; ++v) m(u, v) = m(v, u) = mass0_entry(basis, u, v);
  return m;
}

Eigen::MatrixXd assemble_stiffness0(const Basis& basis) {
  const int n = basis.zero_form_count();
  Eigen::MatrixXd m(n, n);
  for (int u = 0; u < n; ++u)
    for (int v = u; v < n; ++v) m(u, v) = m(v, u) = stiffness0_entry(basis, u, v);
  return m;
}

Eigen::MatrixXd assemble_mixed_d0(const Basis& basis) {
  const auto pairs = pair_index_list(basis);
  const int n = basis.zero_form_count();
  Eigen::MatrixXd m(n, static_cast<int>(pairs.size()));
  for (int i = 0; i < n; ++i)
    for (std::size_t p = 0; p < pairs.size(); ++p)
      m(i, static_cast<int>(p)) = mixed_d0_entry(basis, i, pairs[p].first, pairs[p].second);
  return m;
}

Eigen::MatrixXd assemble_mass1(const Basis& basis) {
  const auto pairs = pair_index_list(basis);
  const int np = static_cast<int>(pairs.size());
  Eigen::MatrixXd m(np, np);
  for (int p = 0; p < np; ++p)
    for (int q = p; q < np; ++q)
      m(p, q) = m(q, p) =
          mass1_entry(basis, pairs[p].first, pairs[p].second, pairs[q].first, pairs[q].second);
  return m;
}

Eigen::MatrixXd assemble_mass2(const Basis& basis) {
  const auto triples = triple_index_list(basis);
  const int nt = static_cast<int>(triples.size());
  Eigen::MatrixXd m(nt, nt);
  for (int p = 0; p < nt; ++p)
    for (int q = p; q < nt; ++q)
      m(p, q) = m(q, p) = mass2_entry(basis, triples[p][0], triples[p][1], triples[p][2],
                                      triples[q][0], triples[q][1], triples[q][2]);
  return m;
}

Eigen::MatrixXd assemble_mixed_d1(const Basis& basis) {
  const auto pairs = pair_index_list(basis);
  const auto triples = triple_index_list(basis);
  Eigen::MatrixXd m(static_cast<int>(pairs.size()), static_cast<int>(triples.size()));
  for (std::size_t p = 0; p < pairs.size(); ++p)
    for (std::size_t q = 0; q < triples.size(); ++q)
      m(static_cast<int>(p), static_cast<int>(q)) =
          mixed_d1_entry(basis, pairs[p].first, pairs[p].second, triples[q][0], triples[q][1],
                         triples[q][2]);
  return m;
}

namespace {

// Gathers the Gaussian factors among the given zero-form indices; constants
// contribute nothing to the product.
std::vector<Gaussian> gaussian_factors(const Basis& basis, std::span<const int> idx) {
  std::vector<Gaussian> gs;
  for (int u : idx)
    if (!basis.is_constant_index(u)) gs.push_back(basis.gaussian_at(u));
  return gs;
}

}  // namespace

double one_form_mass_direct(const Basis& basis, int i, int j, int a, int b) {
  const int idx[4] = {i, j, a, b};
  const std::vector<Gaussian> factors = gaussian_factors(basis, idx);
  if (factors.empty()) throw std::invalid_argument("one-form entry with only constants");
  const WeightedGaussian fused = product(factors);
  const Gaussian& g = fused.density;

  auto pair_term = [&](int p, int s) {
    if (basis.is_constant_index(p) || basis.is_constant_index(s)) return 0.0;
    const Gaussian& gp = basis.gaussian_at(p);
    const Gaussian& gs = basis.gaussian_at(s);
    const Eigen::MatrixXd A = gp.precision() * gs.precision();
    return quadratic_form_expectation(g, A, gs.mean(), gp.mean());
  };
  const double e = pair_term(j, b) - pair_term(j, a) - pair_term(i, b) + pair_term(i, a);
  return fused.weight() * e;
}

double two_form_mass_direct(const Basis& basis, int i, int j, int k, int a, int b, int c) {
  const int idx[6] = {i, j, k, a, b, c};
  const std::vector<Gaussian> factors = gaussian_factors(basis, idx);
  if (factors.empty()) throw std::invalid_argument("two-form entry with only constants");
  const WeightedGaussian fused = product(factors);
  const Gaussian& g = fused.density;
  const int d = basis.dim();

  const Eigen::MatrixXd zero_m = Eigen::MatrixXd::Zero(d, d);
  const Eigen::VectorXd zero_v = Eigen::VectorXd::Zero(d);
  auto prec = [&](int u) -> Eigen::MatrixXd {
    return basis.is_constant_index(u) ? zero_m : basis.gaussian_at(u).precision();
  };
  auto mu = [&](int u) -> Eigen::VectorXd {
    return basis.is_constant_index(u) ? zero_v : basis.gaussian_at(u).mean();
  };
  // E[(p_q · p_t)(p_r · p_u)] with p_w(x) = C_w⁻¹(m_w − x).
  auto T = [&](int q, int t, int r, int u) {
    const Eigen::MatrixXd A = prec(q) * prec(t);
    const Eigen::MatrixXd B = prec(r) * prec(u);
    return biquadratic_form_expectation(g, A, B, mu(t), mu(u), mu(q), mu(r));
  };

  const int left[3] = {i, j, k};
  const int right[3] = {a, b, c};
  double acc = 0.0;
  for (const auto& cl : kCyclic3) {
    const int q = left[cl[1]], r = left[cl[2]];
    for (const auto& cr : kCyclic3) {
      const int t = right[cr[1]], u = right[cr[2]];
      acc += T(q, t, r, u) - T(q, u, r, t);
    }
  }
  return fused.weight() * acc;
}

AugmentedOneForm assemble_augmented(const Eigen::MatrixXd& stiffness0,
                                    const Eigen::MatrixXd& mixed_d0, const Eigen::MatrixXd& mass1,
                                    bool basis_has_constant) {
  Eigen::MatrixXd s = stiffness0;
  Eigen::MatrixXd d0 = mixed_d0;
  Eigen::MatrixXd m1 = mass1;
  if (basis_has_constant) {
    // Strip the constant: drop its zero-form row/col and every pair (0, i);
    // those pairs are plain gradients and become the leading block below.
    const int n = static_cast<int>(s.rows()) - 1;
    const int all_pairs = static_cast<int>(m1.rows());
    const int gauss_pairs = all_pairs - n;
    s = s.bottomRightCorner(n, n).eval();
    d0 = d0.bottomRightCorner(n, gauss_pairs).eval();
    m1 = m1.bottomRightCorner(gauss_pairs, gauss_pairs).eval();
  }
  const int n = static_cast<int>(s.rows());
  const int np = static_cast<int>(m1.rows());
  if (d0.rows() != n || d0.cols() != np)
    throw std::invalid_argument("augmented blocks have inconsistent sizes");

  AugmentedOneForm out;
  out.mass.resize(n + np, n + np);
  out.mass.topLeftCorner(n, n) = s;
  out.mass.topRightCorner(n, np) = d0;
  out.mass.bottomLeftCorner(np, n) = d0.transpose();
  out.mass.bottomRightCorner(np, np) = m1;
  out.differential.resize(n, n + np);
  out.differential.leftCols(n) = s;
  out.differential.rightCols(np) = d0;
  return out;
}

BoundaryQuadrature assemble_boundary(const Basis& basis,
                                     const std::function<double(const Eigen::VectorXd&)>& g,
                                     int sample_count, std::uint64_t seed) {
  const Domain& dom = basis.domain();
  if (!dom.bounded()) throw std::invalid_argument("boundary quadrature needs a bounded domain");
  const int n = basis.zero_form_count();
  const int d = dom.dim();

  BoundaryQuadrature out;
  out.mass = Eigen::MatrixXd::Zero(n, n);
  out.load = Eigen::VectorXd::Zero(n);

  auto accumulate = [&](const Eigen::VectorXd& x, double w) {
    Eigen::VectorXd vals(n);
    for (int u = 0; u < n; ++u) vals(u) = basis.eval_zero_form(u, x);
    out.mass += w * vals * vals.transpose();
    if (g) out.load += (w * g(x)) * vals;
  };

  if (d == 1) {
    accumulate(dom.lo, 1.0);
    accumulate(dom.hi, 1.0);
    return out;
  }

  if (sample_count < 1) throw std::invalid_argument("boundary sample count must be positive");
  std::vector<double> face_area(2 * static_cast<std::size_t>(d));
  double total = 0.0;
  for (int axis = 0; axis < d; ++axis) {
    double a = 1.0;
    for (int i = 0; i < d; ++i)
      if (i != axis) a *= dom.hi(i) - dom.lo(i);
    face_area[2 * axis] = face_area[2 * axis + 1] = a;
    total += 2.0 * a;
  }

  Rng rng(seed);
  const double w = total / sample_count;
  for (int s = 0; s < sample_count; ++s) {
    double pick = rng.uniform() * total;
    std::size_t face = 0;
    while (face + 1 < face_area.size() && pick > face_area[face]) {
      pick -= face_area[face];
      ++face;
    }
    const int axis = static_cast<int>(face / 2);
    Eigen::VectorXd x = rng.uniform_vector(dom.lo, dom.hi);
    x(axis) = (face % 2 == 0) ? dom.lo(axis) : dom.hi(axis);
    accumulate(x, w);
  }
  return out;
}

double default_penalty(int gaussian_count) {
  if (gaussian_count < 1) throw std::invalid_argument("penalty needs a positive basis size");
  return 16.0 * gaussian_count;
}

double estimate_penalty(const Basis& basis, int sample_count, std::uint64_t seed) {
  const Eigen::MatrixXd bmass = assemble_boundary(basis, nullptr, sample_count, seed).mass;
  const Eigen::MatrixXd s0 = assemble_stiffness0(basis);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(bmass);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("boundary mass eigen decomposition failed");
  const double lmax = eig.eigenvalues().maxCoeff();
  if (!(lmax > 0.0)) return default_penalty(basis.gaussian_count());

  const double tol = 1e-12 * lmax;
  std::vector<int> kept;
  for (int i = 0; i < eig.eigenvalues().size(); ++i)
    if (eig.eigenvalues()(i) > tol) kept.push_back(i);
  if (kept.empty()) return default_penalty(basis.gaussian_count());

  Eigen::MatrixXd w(bmass.rows(), static_cast<int>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c)
    w.col(static_cast<int>(c)) =
        eig.eigenvectors().col(kept[c]) / std::sqrt(eig.eigenvalues()(kept[c]));
  Eigen::MatrixXd reduced = w.transpose() * s0 * w;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig2(0.5 * (reduced + reduced.transpose()));
  return eig2.eigenvalues().maxCoeff();
}

Eigen::VectorXd project_forcing(const Basis& basis, const ForcingTerm& f, int sample_count,
                                std::uint64_t seed) {
  if (f.dim != basis.dim()) throw DimensionError("forcing dimension mismatch");
  if (!f.value && !f.inner_with_gaussian)
    throw std::invalid_argument("forcing term needs a value or an exact pairing");
  const int n = basis.zero_form_count();
  Eigen::VectorXd out(n);
  Rng rng(seed);
  for (int u = 0; u < n; ++u) {
    if (basis.is_constant_index(u)) {
      if (f.domain_integral) {
        out(u) = f.domain_integral();
        continue;
      }
      const Domain& dom = basis.domain();
      double acc = 0.0;
      for (int s = 0; s < sample_count; ++s) acc += f.value(rng.uniform_vector(dom.lo, dom.hi));
      out(u) = dom.volume() * acc / sample_count;
      continue;
    }
    const Gaussian& g = basis.gaussian_at(u);
    if (f.inner_with_gaussian) {
      out(u) = f.inner_with_gaussian(g);
      continue;
    }
    // ⟨f, φ⟩ = E_{x~φ}[f(x)]
    double acc = 0.0;
    for (int s = 0; s < sample_count; ++s) {
      const Eigen::VectorXd x = g.mean() + g.chol_lower() * rng.normal_vector(basis.dim());
      acc += f.value(x);
    }
    out(u) = acc / sample_count;
  }
  return out;
}

double envelope_pair_inner(const Basis& basis, const Gaussian& envelope,
                           const Eigen::VectorXd& direction, double weight, int a, int b) {
  if (envelope.dim() != basis.dim() || direction.size() != basis.dim())
    throw DimensionError("envelope dimension mismatch");
  const std::size_t d = static_cast<std::size_t>(basis.dim());

  auto one_sided = [&](int dens_idx, int grad_idx) -> Eigen::VectorXd {
    if (basis.is_constant_index(grad_idx)) return Eigen::VectorXd::Zero(basis.dim());
    std::vector<Gaussian> densities{envelope};
    if (!basis.is_constant_index(dens_idx)) densities.push_back(basis.gaussian_at(dens_idx));
    std::vector<Gaussian> gradients{basis.gaussian_at(grad_idx)};
    const DenseTensor t = integral_moment(densities, gradients);
    Eigen::VectorXd v(basis.dim());
    for (std::size_t i = 0; i < d; ++i) v(static_cast<int>(i)) = t[i];
    return v;
  };

  return weight * direction.dot(one_sided(a, b) - one_sided(b, a));
}

double envelope_gradient_inner(const Basis& basis, const Gaussian& envelope,
                               const Eigen::VectorXd& direction, double weight, int i) {
  if (envelope.dim() != basis.dim() || direction.size() != basis.dim())
    throw DimensionError("envelope dimension mismatch");
  if (basis.is_constant_index(i)) return 0.0;
  const DenseTensor t = integral_moment(std::vector<Gaussian>{envelope},
                                        std::vector<Gaussian>{basis.gaussian_at(i)});
  double acc = 0.0;
  for (int k = 0; k < basis.dim(); ++k) acc += direction(k) * t[static_cast<std::size_t>(k)];
  return weight * acc;
}

}  // namespace grbf
