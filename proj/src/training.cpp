#include "training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <deque>
#include <limits>
#include <stdexcept>

#include "integrals.hpp"

namespace grbf {

int parameter_block_size(int dim, bool isotropic) {
  return isotropic ? dim + 1 : dim + dim * (dim + 1) / 2;
}

int parameter_count(int n, int dim, bool isotropic) {
  return n * parameter_block_size(dim, isotropic);
}

Eigen::VectorXd pack_parameters(const Basis& basis, bool isotropic) {
  const int d = basis.dim();
  const int block = parameter_block_size(d, isotropic);
  const int n = basis.gaussian_count();
  Eigen::VectorXd theta(static_cast<Eigen::Index>(n) * block);
  for (int i = 0; i < n; ++i) {
    const Gaussian& g = basis.gaussians()[static_cast<std::size_t>(i)];
    double* out = theta.data() + static_cast<std::ptrdiff_t>(i) * block;
    for (int k = 0; k < d; ++k) out[k] = g.mean()(k);
    if (isotropic) {
      const Eigen::MatrixXd& c = g.cov();
      const double var = c(0, 0);
      if ((c - var * Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-12 * var)
        throw std::invalid_argument("covariance is not isotropic");
      out[d] = 0.5 * std::log(var);
    } else {
      const Eigen::MatrixXd& l = g.chol_lower();
      int pos = d;
      for (int r = 0; r < d; ++r)
        for (int c = 0; c <= r; ++c)
          out[pos++] = (r == c) ? std::log(l(r, c)) : l(r, c);
    }
  }
  return theta;
}

std::vector<Gaussian> unpack_gaussians(const Eigen::VectorXd& theta, int n, int dim,
                                       bool isotropic) {
  const int block = parameter_block_size(dim, isotropic);
  if (theta.size() != static_cast<Eigen::Index>(n) * block)
    throw DimensionError("parameter vector has the wrong length");
  std::vector<Gaussian> gs;
  gs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double* in = theta.data() + static_cast<std::ptrdiff_t>(i) * block;
    Eigen::VectorXd mean(dim);
    for (int k = 0; k < dim; ++k) mean(k) = in[k];
    if (isotropic) {
      const double sigma = std::exp(in[dim]);
      gs.emplace_back(std::move(mean), sigma * sigma * Eigen::MatrixXd::Identity(dim, dim));
    } else {
      Eigen::MatrixXd l = Eigen::MatrixXd::Zero(dim, dim);
      int pos = dim;
      for (int r = 0; r < dim; ++r)
        for (int c = 0; c <= r; ++c) {
          const double v = in[pos++];
          l(r, c) = (r == c) ? std::exp(v) : v;
        }
      gs.emplace_back(std::move(mean), l * l.transpose());
    }
  }
  return gs;
}

Basis basis_from_parameters(const ProblemSpec& spec, const Eigen::VectorXd& theta, int n,
                            bool isotropic) {
  return Basis(unpack_gaussians(theta, n, spec.dim, isotropic), spec.domain, false);
}

double fill_distance(const Eigen::MatrixXd& points, const Eigen::VectorXd& lo,
                     const Eigen::VectorXd& hi) {
  const int d = static_cast<int>(lo.size());
  if (hi.size() != d || points.cols() != d) throw DimensionError("fill_distance shape mismatch");
  if (points.rows() < 1) throw std::invalid_argument("fill_distance needs at least one point");

  int per_axis = 1025;
  if (d > 1) per_axis = std::max(3, static_cast<int>(std::floor(std::pow(2e5, 1.0 / d))));

  std::vector<std::size_t> shape(static_cast<std::size_t>(d), static_cast<std::size_t>(per_axis));
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  Eigen::VectorXd x(d);
  double worst = 0.0;
  do {
    for (int k = 0; k < d; ++k)
      x(k) = lo(k) + (hi(k) - lo(k)) * static_cast<double>(idx[static_cast<std::size_t>(k)]) /
                         (per_axis - 1);
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < points.rows(); ++r)
      best = std::min(best, (points.row(r).transpose() - x).norm());
    worst = std::max(worst, best);
  } while (next_index(shape, idx));
  return worst;
}

namespace {

double stiffness_raw(const Gaussian& a, const Gaussian& b) {
  const Gaussian grads[2] = {a, b};
  return partial_trace(integral_moment({}, grads), 0, 1).value();
}

}  // namespace

LossEvaluator::LossEvaluator(const ProblemSpec& spec, Dataset data, int n, bool isotropic)
    : spec_(spec), data_(std::move(data)), n_(n), isotropic_(isotropic),
      block_(parameter_block_size(spec.dim, isotropic)) {
  if (n_ < 1) throw std::invalid_argument("basis size must be positive");
  const int count = static_cast<int>(data_.points.rows());
  if (count < 1) throw std::invalid_argument("empty data set");
  if (!spec_.forcing.inner_with_gaussian)
    throw std::invalid_argument("training requires an exact forcing pairing");

  denom_ = data_.values.squaredNorm();
  if (spec_.mixed) denom_ += data_.vector_values.squaredNorm();
  if (!(denom_ > 0.0)) throw std::invalid_argument("data values are identically zero");

  gaussians_.resize(static_cast<std::size_t>(n_));
  phi_.setZero(count, n_);
  rhs_.setZero(n_);
  stiffness_.setZero(n_, n_);

  if (spec_.bounded()) {
    gamma_ = spec_.penalty(n_);
    if (spec_.dim != 1)
      throw std::invalid_argument("training on bounded domains is one-dimensional");
    boundary_vals_.setZero(2, n_);
    boundary_g_.resize(2);
    boundary_g_(0) = spec_.boundary_value ? spec_.boundary_value(spec_.domain.lo) : 0.0;
    boundary_g_(1) = spec_.boundary_value ? spec_.boundary_value(spec_.domain.hi) : 0.0;
  }

  if (spec_.mixed) {
    if (!spec_.vector_forcing || !spec_.vector_forcing->pair_inner ||
        !spec_.vector_forcing->gradient_inner)
      throw std::invalid_argument("training requires exact field pairings");
    // Pair index bookkeeping over plain Gaussian indices (no constant).
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) pairs_.emplace_back(i, j);
    const int np = static_cast<int>(pairs_.size());
    mass1_.setZero(np, np);
    mixed_d0_.setZero(n_, np);
    field_rhs_.setZero(np);
    grad_rhs_.setZero(n_);
    psi_.assign(static_cast<std::size_t>(np), Eigen::MatrixXd::Zero(count, spec_.dim));
    grad_psi_.assign(static_cast<std::size_t>(n_), Eigen::MatrixXd::Zero(count, spec_.dim));
  }
}

int LossEvaluator::parameter_count() const { return n_ * block_; }

void LossEvaluator::refresh(const Eigen::VectorXd& theta) {
  if (theta.size() != static_cast<Eigen::Index>(n_) * block_)
    throw DimensionError("parameter vector has the wrong length");

  std::vector<int> changed;
  for (int i = 0; i < n_; ++i) {
    if (!primed_ ||
        std::memcmp(theta_cache_.data() + static_cast<std::ptrdiff_t>(i) * block_,
                    theta.data() + static_cast<std::ptrdiff_t>(i) * block_,
                    sizeof(double) * static_cast<std::size_t>(block_)) != 0)
      changed.push_back(i);
  }
  theta_cache_ = theta;
  primed_ = true;
  if (changed.empty()) return;

  const int count = static_cast<int>(data_.points.rows());
  std::vector<bool> is_changed(static_cast<std::size_t>(n_), false);
  for (int i : changed) is_changed[static_cast<std::size_t>(i)] = true;

  for (int i : changed) {
    const Eigen::VectorXd block = theta.segment(static_cast<Eigen::Index>(i) * block_, block_);
    gaussians_[static_cast<std::size_t>(i)] =
        unpack_gaussians(block, 1, spec_.dim, isotropic_)[0];
    const Gaussian& g = *gaussians_[static_cast<std::size_t>(i)];

    for (int r = 0; r < count; ++r) phi_(r, i) = g.density(data_.points.row(r).transpose());
    rhs_(i) = spec_.forcing.inner_with_gaussian(g);
    if (spec_.bounded()) {
      boundary_vals_(0, i) = g.density(spec_.domain.lo);
      boundary_vals_(1, i) = g.density(spec_.domain.hi);
    }
  }

  for (int i : changed) {
    const Gaussian& gi = *gaussians_[static_cast<std::size_t>(i)];
    for (int j = 0; j < n_; ++j) {
      if (is_changed[static_cast<std::size_t>(j)] && j < i) continue;
      if (!gaussians_[static_cast<std::size_t>(j)]) continue;
      const double s = stiffness_raw(gi, *gaussians_[static_cast<std::size_t>(j)]);
      stiffness_(i, j) = stiffness_(j, i) = s;
    }
  }

  if (!spec_.mixed) return;

  // The mixed matrices are assembled over a throwaway basis view so the shared
  // entry formulas apply unchanged.
  std::vector<Gaussian> all;
  all.reserve(static_cast<std::size_t>(n_));
  for (const auto& g : gaussians_) all.push_back(*g);
  const Basis view(all, spec_.domain, false);
  const int np = static_cast<int>(pairs_.size());

  auto pair_changed = [&](int p) {
    return is_changed[static_cast<std::size_t>(pairs_[p].first)] ||
           is_changed[static_cast<std::size_t>(pairs_[p].second)];
  };

  for (int i : changed) {
    grad_rhs_(i) = spec_.vector_forcing->gradient_inner(view, i);
    const Gaussian& g = *gaussians_[static_cast<std::size_t>(i)];
    for (int r = 0; r < count; ++r) {
      const Eigen::VectorXd x = data_.points.row(r).transpose();
      grad_psi_[static_cast<std::size_t>(i)].row(r) =
          (g.density(x) * g.gradient_factor(x)).transpose();
    }
  }

  for (int p = 0; p < np; ++p) {
    const auto [a, b] = pairs_[p];
    if (pair_changed(p)) {
      field_rhs_(p) = spec_.vector_forcing->pair_inner(view, a, b);
      for (int r = 0; r < count; ++r)
        psi_[static_cast<std::size_t>(p)].row(r) =
            view.eval_pair_form(a, b, data_.points.row(r).transpose()).transpose();
    }
    for (int q = p; q < np; ++q) {
      if (!pair_changed(p) && !pair_changed(q)) continue;
      const auto [c, d] = pairs_[q];
      mass1_(p, q) = mass1_(q, p) = mass1_entry(view, a, b, c, d);
    }
  }
  for (int i = 0; i < n_; ++i)
    for (int p = 0; p < np; ++p) {
      if (!is_changed[static_cast<std::size_t>(i)] && !pair_changed(p)) continue;
      mixed_d0_(i, p) = mixed_d0_entry(view, i, pairs_[p].first, pairs_[p].second);
    }
}

LossEvaluator::Result LossEvaluator::eval_scalar() {
  Eigen::MatrixXd lhs = stiffness_;
  Eigen::VectorXd rhs = rhs_;
  if (spec_.bounded() && gamma_ > 0.0) {
    lhs += gamma_ * boundary_vals_.transpose() * boundary_vals_;
    rhs += gamma_ * boundary_vals_.transpose() * boundary_g_;
  }
  const LeastSquaresResult sol = solve_least_squares(lhs, rhs);
  const Eigen::VectorXd pred = phi_ * sol.x;

  Result r;
  r.kappa = sol.kappa;
  r.loss = (pred - data_.values).squaredNorm() / denom_;
  return r;
}

LossEvaluator::Result LossEvaluator::eval_mixed() {
  const int np = static_cast<int>(pairs_.size());
  const int nf = n_ + np;
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(nf + n_, nf + n_);
  lhs.topLeftCorner(n_, n_) = stiffness_;
  lhs.block(0, n_, n_, np) = mixed_d0_;
  lhs.block(n_, 0, np, n_) = mixed_d0_.transpose();
  lhs.block(n_, n_, np, np) = mass1_;
  lhs.topRightCorner(nf, n_) = -lhs.topLeftCorner(nf, nf).leftCols(n_);
  lhs.bottomLeftCorner(n_, nf) = -lhs.topLeftCorner(nf, nf).topRows(n_);
  Eigen::VectorXd rhs(nf + n_);
  rhs.head(n_) = grad_rhs_;
  rhs.segment(n_, np) = field_rhs_;
  rhs.tail(n_) = rhs_;

  const LeastSquaresResult sol = solve_least_squares(lhs, rhs);
  const Eigen::VectorXd u_pred = phi_ * sol.x.tail(n_);

  const int count = static_cast<int>(data_.points.rows());
  Eigen::MatrixXd f_pred = Eigen::MatrixXd::Zero(count, spec_.dim);
  for (int i = 0; i < n_; ++i) f_pred += sol.x(i) * grad_psi_[static_cast<std::size_t>(i)];
  for (int p = 0; p < np; ++p) f_pred += sol.x(n_ + p) * psi_[static_cast<std::size_t>(p)];

  Result r;
  r.kappa = sol.kappa;
  r.scalar_error = (u_pred - data_.values).squaredNorm() / denom_;
  r.field_error = (f_pred - data_.vector_values).squaredNorm() / denom_;
  r.loss = r.scalar_error + r.field_error;
  return r;
}

LossEvaluator::Result LossEvaluator::eval(const Eigen::VectorXd& theta) {
  refresh(theta);
  ++evaluations_;
  return spec_.mixed ? eval_mixed() : eval_scalar();
}

Eigen::VectorXd fd_gradient(LossEvaluator& loss, const Eigen::VectorXd& theta, double fd_step) {
  if (!(fd_step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  Eigen::VectorXd grad(theta.size());
  Eigen::VectorXd probe = theta;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double h = fd_step * (1.0 + std::abs(theta(k)));
    probe(k) = theta(k) + h;
    const double up = loss.eval(probe).loss;
    probe(k) = theta(k) - h;
    const double down = loss.eval(probe).loss;
    probe(k) = theta(k);
    grad(k) = (up - down) / (2.0 * h);
  }
  return grad;
}

void adam_step(AdamState& state, Eigen::VectorXd& theta, const Eigen::VectorXd& grad, double lr) {
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  if (state.step == 0) {
    state.m = Eigen::VectorXd::Zero(theta.size());
    state.v = Eigen::VectorXd::Zero(theta.size());
  }
  ++state.step;
  state.m = beta1 * state.m + (1.0 - beta1) * grad;
  state.v = beta2 * state.v + (1.0 - beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(beta1, state.step);
  const double bc2 = 1.0 - std::pow(beta2, state.step);
  for (Eigen::Index k = 0; k < theta.size(); ++k)
    theta(k) -= lr * (state.m(k) / bc1) / (std::sqrt(state.v(k) / bc2) + eps);
}

const char* stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::Completed: return "completed";
    case StopReason::ConditionThreshold: return "condition-threshold";
    case StopReason::NonFiniteLoss: return "non-finite-loss";
  }
  return "unknown";
}

namespace {

struct BestState {
  Eigen::VectorXd theta;
  double loss = std::numeric_limits<double>::infinity();
  void consider(const Eigen::VectorXd& t, double l) {
    if (std::isfinite(l) && l < loss) {
      loss = l;
      theta = t;
    }
  }
};

}  // namespace

TrainResult train(const ProblemSpec& spec, int n, const TrainConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  Dataset data = sample_data(spec, config.data_count, config.data_seed);
  const Basis b0 = init_basis(spec, n, config.init_seed);
  Eigen::VectorXd theta = pack_parameters(b0, config.isotropic);
  LossEvaluator loss(spec, std::move(data), n, config.isotropic);

  TrainResult result;
  auto r = loss.eval(theta);
  result.loss_initial = r.loss;
  result.kappa = r.kappa;
  result.trace.push_back({r.loss, r.kappa});
  BestState best;
  best.consider(theta, r.loss);

  const double c1 = 1e-4;  // Armijo slope fraction
  AdamState adam;
  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> history;  // (s, y)
  Eigen::VectorXd grad;
  bool have_grad = false;

  for (int step = 1; step <= config.steps; ++step) {
    if (config.optimizer == TrainConfig::Optimizer::Adam) {
      grad = fd_gradient(loss, theta, config.fd_step);
      adam_step(adam, theta, grad, config.lr);
    } else {
      if (!have_grad) {
        grad = fd_gradient(loss, theta, config.fd_step);
        have_grad = true;
      }
      // Two-loop recursion for the L-BFGS direction (history 10).
      Eigen::VectorXd q = grad;
      std::vector<double> alpha(history.size());
      for (std::size_t h = history.size(); h-- > 0;) {
        const auto& [s, y] = history[h];
        const double rho = 1.0 / y.dot(s);
        alpha[h] = rho * s.dot(q);
        q -= alpha[h] * y;
      }
      if (!history.empty()) {
        const auto& [s, y] = history.back();
        q *= s.dot(y) / y.dot(y);
      }
      for (std::size_t h = 0; h < history.size(); ++h) {
        const auto& [s, y] = history[h];
        const double rho = 1.0 / y.dot(s);
        q += (alpha[h] - rho * y.dot(q)) * s;
      }
      Eigen::VectorXd dir = -q;
      double slope = grad.dot(dir);
      if (!(slope < 0.0)) {
        history.clear();
        dir = -grad;
        slope = grad.dot(dir);
      }
      const double f0 = loss.eval(theta).loss;
      double t = 1.0;
      Eigen::VectorXd trial;
      double f_trial = 0.0;
      for (int bt = 0; bt < 40; ++bt) {
        trial = theta + t * dir;
        f_trial = loss.eval(trial).loss;
        if (std::isfinite(f_trial) && f_trial <= f0 + c1 * t * slope) break;
        t *= 0.5;
      }
      Eigen::VectorXd grad_new = fd_gradient(loss, trial, config.fd_step);
      Eigen::VectorXd s = trial - theta;
      Eigen::VectorXd y = grad_new - grad;
      if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
        history.emplace_back(std::move(s), std::move(y));
        if (history.size() > 10) history.pop_front();
      }
      theta = trial;
      grad = std::move(grad_new);
    }

    r = loss.eval(theta);
    result.trace.push_back({r.loss, r.kappa});
    result.steps_run = step;
    result.kappa = r.kappa;
    if (!std::isfinite(r.loss)) {
      result.stop_reason = StopReason::NonFiniteLoss;
      break;
    }
    best.consider(theta, r.loss);
    if (r.loss < r.kappa * config.stop_factor) {
      result.stop_reason = StopReason::ConditionThreshold;
      break;
    }
  }

  result.theta = best.theta;
  result.loss = best.loss;
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace grbf
