#include "solver.hpp"

#include <cmath>

namespace grbf {

AssembledSystem build_poisson(const Basis& basis, const ForcingTerm& f, double gamma,
                              const std::function<double(const Eigen::VectorXd&)>& boundary_g,
                              int boundary_samples, std::uint64_t seed) {
  if (gamma < 0.0) throw std::invalid_argument("penalty weight must be nonnegative");
  if (!basis.domain().bounded() && gamma != 0.0)
    throw std::invalid_argument("boundary penalty requires a bounded domain");

  AssembledSystem sys;
  sys.gamma = gamma;
  sys.lhs = assemble_stiffness0(basis);
  sys.rhs = project_forcing(basis, f);
  if (basis.domain().bounded() && gamma > 0.0) {
    const BoundaryQuadrature bq = assemble_boundary(basis, boundary_g, boundary_samples, seed);
    sys.lhs += gamma * bq.mass;
    sys.rhs += gamma * bq.load;
  }
  return sys;
}

AssembledSystem build_mixed_darcy(const Basis& basis, const VectorFieldTerm& g_field,
                                  const ForcingTerm& f) {
  if (basis.dim() != 3) throw std::invalid_argument("mixed formulation is three-dimensional");
  if (basis.has_constant())
    throw std::invalid_argument("mixed formulation expects a plain Gaussian basis");
  if (!g_field.pair_inner || !g_field.gradient_inner)
    throw std::invalid_argument("vector field needs pair and gradient inner products");
  const auto pairs = pair_index_list(basis);
  const int np = static_cast<int>(pairs.size());
  const int n = basis.gaussian_count();
  const int nf = n + np;

  const AugmentedOneForm aug = assemble_augmented(
      assemble_stiffness0(basis), assemble_mixed_d0(basis), assemble_mass1(basis), false);

  AssembledSystem sys;
  sys.lhs = Eigen::MatrixXd::Zero(nf + n, nf + n);
  sys.lhs.topLeftCorner(nf, nf) = aug.mass;
  sys.lhs.topRightCorner(nf, n) = -aug.differential.transpose();
  sys.lhs.bottomLeftCorner(n, nf) = -aug.differential;

  sys.rhs.resize(nf + n);
  for (int i = 0; i < n; ++i) sys.rhs(i) = g_field.gradient_inner(basis, i);
  for (int p = 0; p < np; ++p)
    sys.rhs(n + p) = g_field.pair_inner(basis, pairs[p].first, pairs[p].second);
  sys.rhs.tail(n) = project_forcing(basis, f);
  return sys;
}

LeastSquaresResult solve_least_squares(const Eigen::MatrixXd& lhs, const Eigen::VectorXd& rhs,
                                       double rel_cutoff) {
  if (lhs.rows() != rhs.size()) throw DimensionError("system dimensions mismatch");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(lhs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv(0) > 0.0)) throw SingularError("matrix is numerically zero");

  const double cutoff = rel_cutoff * sv(0);
  int rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  if (rank == 0) throw SingularError("matrix is numerically zero");

  const Eigen::VectorXd projected = svd.matrixU().leftCols(rank).transpose() * rhs;
  Eigen::VectorXd scaled(rank);
  for (int i = 0; i < rank; ++i) scaled(i) = projected(i) / sv(i);

  LeastSquaresResult out;
  out.x = svd.matrixV().leftCols(rank) * scaled;
  out.kappa = sv(0) / sv(rank - 1);
  out.rank = rank;
  return out;
}

Eigen::VectorXd evaluate_zero_form(const Basis& basis, const Eigen::VectorXd& coeffs,
                                   const Eigen::MatrixXd& points) {
  if (coeffs.size() != basis.zero_form_count())
    throw DimensionError("coefficient count mismatch");
  if (points.cols() != basis.dim()) throw DimensionError("evaluation point dimension mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(points.rows());
  for (int r = 0; r < points.rows(); ++r) {
    const Eigen::VectorXd x = points.row(r).transpose();
    double acc = 0.0;
    for (int u = 0; u < coeffs.size(); ++u) acc += coeffs(u) * basis.eval_zero_form(u, x);
    out(r) = acc;
  }
  return out;
}

Eigen::MatrixXd evaluate_pair_form(const Basis& basis, const Eigen::VectorXd& coeffs,
                                   const Eigen::MatrixXd& points) {
  const auto pairs = pair_index_list(basis);
  if (coeffs.size() != static_cast<Eigen::Index>(pairs.size()))
    throw DimensionError("coefficient count mismatch");
  if (points.cols() != basis.dim()) throw DimensionError("evaluation point dimension mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(points.rows(), basis.dim());
  for (int r = 0; r < points.rows(); ++r) {
    const Eigen::VectorXd x = points.row(r).transpose();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(basis.dim());
    for (std::size_t p = 0; p < pairs.size(); ++p)
      acc += coeffs(static_cast<int>(p)) *
             basis.eval_pair_form(pairs[p].first, pairs[p].second, x);
    out.row(r) = acc.transpose();
  }
  return out;
}

Eigen::MatrixXd evaluate_one_form(const Basis& basis, const Eigen::VectorXd& coeffs,
                                  const Eigen::MatrixXd& points) {
  if (basis.has_constant())
    throw std::invalid_argument("augmented one-form evaluation expects a plain Gaussian basis");
  const int n = basis.gaussian_count();
  const auto pairs = pair_index_list(basis);
  if (coeffs.size() != static_cast<Eigen::Index>(n + static_cast<int>(pairs.size())))
    throw DimensionError("coefficient count mismatch");
  Eigen::MatrixXd out = evaluate_pair_form(basis, coeffs.tail(coeffs.size() - n), points);
  for (int r = 0; r < points.rows(); ++r) {
    const Eigen::VectorXd x = points.row(r).transpose();
    for (int i = 0; i < n; ++i) {
      const Gaussian& g = basis.gaussian_at(i);
      out.row(r) += coeffs(i) * (g.density(x) * g.gradient_factor(x)).transpose();
    }
  }
  return out;
}

double relative_mse(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth) {
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols())
    throw DimensionError("relative_mse shape mismatch");
  const double denom = truth.squaredNorm();
  if (!(denom > 0.0)) throw std::invalid_argument("relative_mse against zero truth");
  return (predicted - truth).squaredNorm() / denom;
}

}  // namespace grbf
