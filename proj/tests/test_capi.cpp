#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <string>
#include <vector>

#include "grbf/grbf.h"

namespace {

struct ProblemHandle {
  grbf_problem* p = nullptr;
  explicit ProblemHandle(int id) { REQUIRE(grbf_problem_create(id, &p) == GRBF_OK); }
  ~ProblemHandle() { grbf_problem_destroy(p); }
};

struct BasisHandle {
  grbf_basis* b = nullptr;
  BasisHandle(const grbf_problem* p, int n, uint64_t seed) {
    REQUIRE(grbf_basis_create_default(p, n, seed, &b) == GRBF_OK);
  }
  ~BasisHandle() { grbf_basis_destroy(b); }
};

}  // namespace

TEST_CASE("version and status strings") {
  CHECK(std::string(grbf_version()) == "0.1.0");
  CHECK(std::string(grbf_status_message(GRBF_OK)) == "ok");
  CHECK(std::strlen(grbf_status_message(GRBF_ERROR_NOT_SPD)) > 0);
  CHECK(std::strlen(grbf_status_message(static_cast<grbf_status>(99))) > 0);
  CHECK(std::string(grbf_stop_reason_name(0)) == "completed");
}

TEST_CASE("problem lifecycle and errors") {
  grbf_problem* p = nullptr;
  CHECK(grbf_problem_create(7, &p) == GRBF_ERROR_INVALID_ARGUMENT);
  CHECK(p == nullptr);
  CHECK(std::strlen(grbf_last_error()) > 0);
  CHECK(grbf_problem_create(1, nullptr) == GRBF_ERROR_INVALID_ARGUMENT);

  ProblemHandle p3(3);
  CHECK(grbf_problem_dim(p3.p) == 8);
  CHECK(grbf_problem_mixed(p3.p) == 0);
  ProblemHandle p4(4);
  CHECK(grbf_problem_mixed(p4.p) == 1);
}

TEST_CASE("basis creation validates covariances") {
  ProblemHandle p1(1);
  BasisHandle basis(p1.p, 6, 1);
  CHECK(grbf_basis_size(basis.b) == 6);

  const double means[2] = {0.0, 1.0};
  const double bad_covs[2] = {1.0, -1.0};  // second covariance not positive
  grbf_basis* out = nullptr;
  CHECK(grbf_basis_create(p1.p, 2, means, bad_covs, &out) == GRBF_ERROR_NOT_SPD);
  CHECK(out == nullptr);

  const double covs[2] = {1.0, 0.5};
  REQUIRE(grbf_basis_create(p1.p, 2, means, covs, &out) == GRBF_OK);
  CHECK(grbf_basis_size(out) == 2);
  grbf_basis_destroy(out);

  CHECK(grbf_basis_create(p1.p, 0, means, covs, &out) == GRBF_ERROR_INVALID_ARGUMENT);
}

TEST_CASE("solve grades a scalar benchmark") {
  ProblemHandle p1(1);
  BasisHandle basis(p1.p, 16, 1);
  grbf_solve_summary summary;
  grbf_solution* solution = nullptr;
  REQUIRE(grbf_solve(p1.p, basis.b, -1.0, 4096, 1, &summary, &solution) == GRBF_OK);
  CHECK(summary.rel_mse < 1e-3);
  CHECK(summary.kappa >= 1.0);
  CHECK(summary.gamma == 0.0);  // unbounded problem: no penalty
  CHECK(summary.n == 16);

  REQUIRE(solution != nullptr);
  CHECK(grbf_solution_size(solution) == 16);
  std::vector<double> coeffs(16);
  CHECK(grbf_solution_coefficients(solution, coeffs.data()) == GRBF_OK);
  const double pt = 1.0;
  double value = 0.0;
  CHECK(grbf_solution_evaluate(solution, &pt, 1, &value) == GRBF_OK);
  // u(1) = e^{-1/2}; the n = 16 solve is well inside 1e-2 pointwise.
  CHECK(value == doctest::Approx(0.6065306597126334).epsilon(1e-2));
  grbf_solution_destroy(solution);

  // The mixed benchmark has no scalar weak form.
  ProblemHandle p4(4);
  BasisHandle mixed_basis(p4.p, 4, 1);
  CHECK(grbf_solve(p4.p, mixed_basis.b, -1.0, 64, 1, &summary, nullptr) ==
        GRBF_ERROR_INVALID_ARGUMENT);
  // And a basis built for one problem cannot grade another dimension.
  CHECK(grbf_solve(p1.p, mixed_basis.b, -1.0, 64, 1, &summary, nullptr) ==
        GRBF_ERROR_DIMENSION);
}

TEST_CASE("mixed solve") {
  ProblemHandle p4(4);
  BasisHandle basis(p4.p, 6, 1);
  grbf_whitney_summary summary;
  REQUIRE(grbf_whitney_solve(p4.p, basis.b, 1024, 1, &summary) == GRBF_OK);
  CHECK(summary.total_error == doctest::Approx(summary.mse_u + summary.mse_f).epsilon(1e-12));
  CHECK(summary.total_error < 0.05);
  CHECK(summary.mse_u < 1e-12);
  CHECK(summary.n == 6);

  ProblemHandle p1(1);
  BasisHandle scalar_basis(p1.p, 4, 1);
  CHECK(grbf_whitney_solve(p1.p, scalar_basis.b, 64, 1, &summary) ==
        GRBF_ERROR_INVALID_ARGUMENT);
}

TEST_CASE("train options defaults") {
  ProblemHandle p3(3);
  grbf_train_options opts;
  REQUIRE(grbf_train_options_default(p3.p, &opts) == GRBF_OK);
  CHECK(opts.steps == 2000);
  CHECK(opts.lr == 0.05);
  CHECK(opts.isotropic == 1);
  CHECK(opts.data_count == 4096);
  CHECK(opts.optimizer == 0);

  ProblemHandle p1(1);
  REQUIRE(grbf_train_options_default(p1.p, &opts) == GRBF_OK);
  CHECK(opts.steps == 1000);
  CHECK(opts.isotropic == 0);
}

TEST_CASE("training through the c interface") {
  ProblemHandle p1(1);
  grbf_train_options opts;
  REQUIRE(grbf_train_options_default(p1.p, &opts) == GRBF_OK);
  opts.steps = 4;
  opts.data_count = 128;

  grbf_train_summary summary;
  grbf_trace* trace = nullptr;
  grbf_basis* best = nullptr;
  REQUIRE(grbf_train(p1.p, 4, &opts, &summary, &trace, &best) == GRBF_OK);
  CHECK(summary.loss_final <= summary.loss_initial);
  CHECK(summary.steps_run == 4);
  CHECK(summary.stop_reason == 0);

  REQUIRE(trace != nullptr);
  CHECK(grbf_trace_length(trace) == 5);
  double loss = 0.0, kappa = 0.0;
  CHECK(grbf_trace_entry(trace, 0, &loss, &kappa) == GRBF_OK);
  CHECK(loss == doctest::Approx(summary.loss_initial));
  CHECK(grbf_trace_entry(trace, 99, &loss, &kappa) == GRBF_ERROR_INVALID_ARGUMENT);
  grbf_trace_destroy(trace);

  REQUIRE(best != nullptr);
  CHECK(grbf_basis_size(best) == 4);
  grbf_solve_summary solved;
  CHECK(grbf_solve(p1.p, best, -1.0, 1024, 1, &solved, nullptr) == GRBF_OK);
  CHECK(solved.rel_mse <= summary.loss_final * 10.0 + 1e-9);
  grbf_basis_destroy(best);

  CHECK(grbf_train(p1.p, 4, nullptr, &summary, nullptr, nullptr) ==
        GRBF_ERROR_INVALID_ARGUMENT);
}
