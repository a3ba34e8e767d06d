#include "grbf/grbf.h"

#include <Eigen/Dense>
#include <cstring>
#include <exception>
#include <iostream>
#include <new>
#include <string>
#include <vector>

#include "problems.hpp"
#include "selftest.hpp"
#include "solver.hpp"
#include "training.hpp"

struct grbf_problem {
  grbf::ProblemSpec spec;
};
struct grbf_basis {
  grbf::Basis basis;
};
struct grbf_solution {
  grbf::Basis basis;
  Eigen::VectorXd coeffs;
};
struct grbf_trace {
  std::vector<grbf::TraceEntry> entries;
};

namespace {

thread_local std::string g_last_error;

grbf_status fail(grbf_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
grbf_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const grbf::NotSpdError& e) {
    return fail(GRBF_ERROR_NOT_SPD, e.what());
  } catch (const grbf::DimensionError& e) {
    return fail(GRBF_ERROR_DIMENSION, e.what());
  } catch (const grbf::SingularError& e) {
    return fail(GRBF_ERROR_SINGULAR, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(GRBF_ERROR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(GRBF_ERROR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(GRBF_ERROR_INTERNAL, e.what());
  }
}

grbf_status require(bool ok, const char* message) {
  return ok ? GRBF_OK : fail(GRBF_ERROR_INVALID_ARGUMENT, message);
}

// Relative errors of a mixed solve at seeded evaluation points.
grbf_whitney_summary grade_mixed(const grbf::ProblemSpec& spec, const grbf::Basis& basis,
                                 int eval_count, std::uint64_t eval_seed) {
  const grbf::AssembledSystem system =
      grbf::build_mixed_darcy(basis, *spec.vector_forcing, spec.forcing);
  const grbf::LeastSquaresResult sol = grbf::solve_least_squares(system.lhs, system.rhs);

  const Eigen::MatrixXd points = grbf::evaluation_points(spec, eval_count, eval_seed);
  const int count = static_cast<int>(points.rows());
  Eigen::VectorXd u_exact(count);
  Eigen::MatrixXd f_exact(count, spec.dim);
  for (int r = 0; r < count; ++r) {
    u_exact(r) = spec.exact(points.row(r).transpose());
    f_exact.row(r) = spec.exact_vector(points.row(r).transpose()).transpose();
  }

  const int form_count =
      basis.gaussian_count() + static_cast<int>(grbf::pair_index_list(basis).size());
  const Eigen::VectorXd u_pred =
      grbf::evaluate_zero_form(basis, sol.x.tail(basis.gaussian_count()), points);
  const Eigen::MatrixXd f_pred = grbf::evaluate_one_form(basis, sol.x.head(form_count), points);

  const double denom = u_exact.squaredNorm() + f_exact.squaredNorm();
  grbf_whitney_summary summary{};
  summary.mse_u = (u_pred - u_exact).squaredNorm() / denom;
  summary.mse_f = (f_pred - f_exact).squaredNorm() / denom;
  summary.total_error = summary.mse_u + summary.mse_f;
  summary.kappa = sol.kappa;
  summary.n = basis.gaussian_count();
  return summary;
}

}  // namespace

extern "C" {

const char* grbf_version(void) { return "0.1.0"; }

const char* grbf_status_message(grbf_status status) {
  switch (status) {
    case GRBF_OK: return "ok";
    case GRBF_ERROR_INVALID_ARGUMENT: return "invalid argument";
    case GRBF_ERROR_NOT_SPD: return "matrix is not symmetric positive definite";
    case GRBF_ERROR_DIMENSION: return "dimension mismatch";
    case GRBF_ERROR_SINGULAR: return "system is singular";
    case GRBF_ERROR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* grbf_last_error(void) { return g_last_error.c_str(); }

grbf_status grbf_problem_create(int id, grbf_problem** out) {
  if (grbf_status s = require(out != nullptr, "out must not be null")) return s;
  return guarded([&] {
    *out = new grbf_problem{grbf::make_problem(id)};
    return GRBF_OK;
  });
}

void grbf_problem_destroy(grbf_problem* problem) { delete problem; }

int grbf_problem_dim(const grbf_problem* problem) { return problem ? problem->spec.dim : 0; }

int grbf_problem_mixed(const grbf_problem* problem) {
  return problem && problem->spec.mixed ? 1 : 0;
}

grbf_status grbf_basis_create_default(const grbf_problem* problem, int n, uint64_t seed,
                                      grbf_basis** out) {
  if (grbf_status s = require(problem && out, "problem and out must not be null")) return s;
  return guarded([&] {
    *out = new grbf_basis{grbf::init_basis(problem->spec, n, seed)};
    return GRBF_OK;
  });
}

grbf_status grbf_basis_create(const grbf_problem* problem, int n, const double* means,
                              const double* covs, grbf_basis** out) {
  if (grbf_status s =
          require(problem && means && covs && out, "all arguments must not be null"))
    return s;
  if (grbf_status s = require(n >= 1, "basis size must be positive")) return s;
  return guarded([&] {
    const int d = problem->spec.dim;
    std::vector<grbf::Gaussian> gs;
    gs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd mean(d);
      std::memcpy(mean.data(), means + static_cast<std::ptrdiff_t>(i) * d,
                  sizeof(double) * static_cast<std::size_t>(d));
      Eigen::MatrixXd cov(d, d);
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c)
          cov(r, c) = covs[(static_cast<std::ptrdiff_t>(i) * d + r) * d + c];
      gs.emplace_back(std::move(mean), std::move(cov));
    }
    *out = new grbf_basis{grbf::Basis(std::move(gs), problem->spec.domain, false)};
    return GRBF_OK;
  });
}

int grbf_basis_size(const grbf_basis* basis) { return basis ? basis->basis.gaussian_count() : 0; }

void grbf_basis_destroy(grbf_basis* basis) { delete basis; }

grbf_status grbf_solve(const grbf_problem* problem, const grbf_basis* basis, double gamma,
                       int eval_count, uint64_t eval_seed, grbf_solve_summary* summary,
                       grbf_solution** solution_out) {
  if (grbf_status s =
          require(problem && basis && summary, "problem, basis and summary must not be null"))
    return s;
  if (solution_out) *solution_out = nullptr;
  return guarded([&] {
    const grbf::ProblemSpec& spec = problem->spec;
    if (spec.mixed)
      return fail(GRBF_ERROR_INVALID_ARGUMENT,
                  "mixed benchmark: use grbf_whitney_solve instead");
    const int n = basis->basis.gaussian_count();
    const double used_gamma = gamma < 0.0 ? spec.penalty(n) : gamma;
    const grbf::AssembledSystem system =
        grbf::build_poisson(basis->basis, spec.forcing, used_gamma, spec.boundary_value);
    const grbf::LeastSquaresResult sol = grbf::solve_least_squares(system.lhs, system.rhs);

    const Eigen::MatrixXd points = grbf::evaluation_points(spec, eval_count, eval_seed);
    Eigen::VectorXd exact(points.rows());
    for (Eigen::Index r = 0; r < points.rows(); ++r)
      exact(r) = spec.exact(points.row(r).transpose());
    const Eigen::VectorXd pred = grbf::evaluate_zero_form(basis->basis, sol.x, points);

    summary->rel_mse = grbf::relative_mse(pred, exact);
    summary->kappa = sol.kappa;
    summary->gamma = used_gamma;
    summary->n = n;
    if (solution_out) *solution_out = new grbf_solution{basis->basis, sol.x};
    return GRBF_OK;
  });
}

int grbf_solution_size(const grbf_solution* solution) {
  return solution ? static_cast<int>(solution->coeffs.size()) : 0;
}

grbf_status grbf_solution_coefficients(const grbf_solution* solution, double* out) {
  if (grbf_status s = require(solution && out, "solution and out must not be null")) return s;
  std::memcpy(out, solution->coeffs.data(),
              sizeof(double) * static_cast<std::size_t>(solution->coeffs.size()));
  return GRBF_OK;
}

grbf_status grbf_solution_evaluate(const grbf_solution* solution, const double* points, int count,
                                   double* values) {
  if (grbf_status s =
          require(solution && points && values, "all arguments must not be null"))
    return s;
  if (grbf_status s = require(count >= 1, "count must be positive")) return s;
  return guarded([&] {
    const int d = solution->basis.dim();
    Eigen::MatrixXd pts(count, d);
    for (int r = 0; r < count; ++r)
      for (int c = 0; c < d; ++c) pts(r, c) = points[static_cast<std::ptrdiff_t>(r) * d + c];
    const Eigen::VectorXd out = grbf::evaluate_zero_form(solution->basis, solution->coeffs, pts);
    std::memcpy(values, out.data(), sizeof(double) * static_cast<std::size_t>(count));
    return GRBF_OK;
  });
}

void grbf_solution_destroy(grbf_solution* solution) { delete solution; }

grbf_status grbf_whitney_solve(const grbf_problem* problem, const grbf_basis* basis,
                               int eval_count, uint64_t eval_seed,
                               grbf_whitney_summary* summary) {
  if (grbf_status s =
          require(problem && basis && summary, "problem, basis and summary must not be null"))
    return s;
  return guarded([&] {
    if (!problem->spec.mixed)
      return fail(GRBF_ERROR_INVALID_ARGUMENT, "not a mixed benchmark: use grbf_solve instead");
    *summary = grade_mixed(problem->spec, basis->basis, eval_count, eval_seed);
    return GRBF_OK;
  });
}

grbf_status grbf_train_options_default(const grbf_problem* problem, grbf_train_options* out) {
  if (grbf_status s = require(problem && out, "problem and out must not be null")) return s;
  const grbf::TrainDefaults& d = problem->spec.train;
  out->steps = d.steps;
  out->lr = d.lr;
  out->optimizer = 0;
  out->isotropic = d.isotropic ? 1 : 0;
  out->data_count = d.data_count;
  out->data_seed = 1;
  out->init_seed = 1;
  out->fd_step = 1e-6;
  out->stop_factor = 1e-15;
  return GRBF_OK;
}

grbf_status grbf_train(const grbf_problem* problem, int n, const grbf_train_options* options,
                       grbf_train_summary* summary, grbf_trace** trace_out,
                       grbf_basis** basis_out) {
  if (grbf_status s =
          require(problem && options && summary, "problem, options and summary must not be null"))
    return s;
  if (trace_out) *trace_out = nullptr;
  if (basis_out) *basis_out = nullptr;
  return guarded([&] {
    grbf::TrainConfig config;
    config.steps = options->steps;
    config.lr = options->lr;
    config.optimizer = options->optimizer == 1 ? grbf::TrainConfig::Optimizer::Lbfgs
                                               : grbf::TrainConfig::Optimizer::Adam;
    config.stop_factor = options->stop_factor;
    config.fd_step = options->fd_step;
    config.isotropic = options->isotropic != 0;
    config.data_count = options->data_count;
    config.data_seed = options->data_seed;
    config.init_seed = options->init_seed;

    const grbf::TrainResult result = grbf::train(problem->spec, n, config);
    summary->loss_initial = result.loss_initial;
    summary->loss_final = result.loss;
    summary->kappa_final = result.kappa;
    summary->seconds = result.seconds;
    summary->steps_run = result.steps_run;
    summary->stop_reason = static_cast<int>(result.stop_reason);
    if (trace_out) *trace_out = new grbf_trace{result.trace};
    if (basis_out)
      *basis_out = new grbf_basis{
          grbf::basis_from_parameters(problem->spec, result.theta, n, config.isotropic)};
    return GRBF_OK;
  });
}

int grbf_trace_length(const grbf_trace* trace) {
  return trace ? static_cast<int>(trace->entries.size()) : 0;
}

grbf_status grbf_trace_entry(const grbf_trace* trace, int step, double* loss, double* kappa) {
  if (grbf_status s = require(trace != nullptr, "trace must not be null")) return s;
  if (grbf_status s = require(step >= 0 && step < static_cast<int>(trace->entries.size()),
                              "step out of range"))
    return s;
  const grbf::TraceEntry& e = trace->entries[static_cast<std::size_t>(step)];
  if (loss) *loss = e.loss;
  if (kappa) *kappa = e.kappa;
  return GRBF_OK;
}

void grbf_trace_destroy(grbf_trace* trace) { delete trace; }

const char* grbf_stop_reason_name(int stop_reason) {
  return grbf::stop_reason_name(static_cast<grbf::StopReason>(stop_reason));
}

grbf_status grbf_selftest(int mutate, int verbose, const char* suite_filter, int* failures) {
  return guarded([&] {
    grbf::SelfTestOptions options;
    options.mutate = mutate != 0;
    options.verbose = verbose != 0;
    options.suite_filter = suite_filter ? suite_filter : "";
    const grbf::SelfTestSummary summary = grbf::run_selftest(options, std::cout);
    if (failures) *failures = summary.failures;
    return GRBF_OK;
  });
}

}  // extern "C"
