#ifndef GRBF_H
#define GRBF_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Gaussian radial basis function variational solver.
 *
 * Every fallible call returns a grbf_status; on failure the thread-local
 * message from grbf_last_error() describes what went wrong. Objects returned
 * through out-parameters are owned by the caller and released with the
 * matching _destroy function. */

typedef enum grbf_status {
  GRBF_OK = 0,
  GRBF_ERROR_INVALID_ARGUMENT = 1,
  GRBF_ERROR_NOT_SPD = 2,
  GRBF_ERROR_DIMENSION = 3,
  GRBF_ERROR_SINGULAR = 4,
  GRBF_ERROR_INTERNAL = 5
} grbf_status;

const char* grbf_version(void);
const char* grbf_status_message(grbf_status status);
const char* grbf_last_error(void);

typedef struct grbf_problem grbf_problem;
typedef struct grbf_basis grbf_basis;
typedef struct grbf_solution grbf_solution;
typedef struct grbf_trace grbf_trace;

/* Manufactured benchmarks: 1 and 2 are one-dimensional Poisson problems
 * (2 on a box with a boundary penalty), 3 is the eight-dimensional Poisson
 * problem, 4 is the three-dimensional mixed first-order system. */
grbf_status grbf_problem_create(int id, grbf_problem** out);
void grbf_problem_destroy(grbf_problem* problem);
int grbf_problem_dim(const grbf_problem* problem);
/* 1 when the benchmark uses the mixed first-order formulation. */
int grbf_problem_mixed(const grbf_problem* problem);

/* The problem's default basis of n Gaussians (seeded placement). */
grbf_status grbf_basis_create_default(const grbf_problem* problem, int n, uint64_t seed,
                                      grbf_basis** out);
/* Explicit basis: means is n x dim row-major, covs is n x dim x dim row-major;
 * every covariance must be symmetric positive definite. */
grbf_status grbf_basis_create(const grbf_problem* problem, int n, const double* means,
                              const double* covs, grbf_basis** out);
int grbf_basis_size(const grbf_basis* basis);
void grbf_basis_destroy(grbf_basis* basis);

typedef struct grbf_solve_summary {
  double rel_mse; /* relative mean squared error on fresh evaluation points */
  double kappa;   /* condition number of the retained spectrum */
  double gamma;   /* boundary penalty weight actually used */
  int n;
} grbf_solve_summary;

/* Assembles and solves the weak system for a scalar benchmark (1-3) and
 * grades the result against the manufactured solution at eval_count seeded
 * points. gamma < 0 selects the problem default (16 n on bounded domains).
 * solution_out may be NULL. */
grbf_status grbf_solve(const grbf_problem* problem, const grbf_basis* basis, double gamma,
                       int eval_count, uint64_t eval_seed, grbf_solve_summary* summary,
                       grbf_solution** solution_out);

int grbf_solution_size(const grbf_solution* solution);
grbf_status grbf_solution_coefficients(const grbf_solution* solution, double* out);
/* points is count x dim row-major; writes count field values. */
grbf_status grbf_solution_evaluate(const grbf_solution* solution, const double* points, int count,
                                   double* values);
void grbf_solution_destroy(grbf_solution* solution);

typedef struct grbf_whitney_summary {
  double total_error; /* mse_u + mse_f */
  double mse_u;
  double mse_f;
  double kappa;
  int n;
} grbf_whitney_summary;

/* Mixed first-order solve (benchmark 4): scalar and vector unknowns together,
 * graded against the manufactured pair at eval_count seeded points. */
grbf_status grbf_whitney_solve(const grbf_problem* problem, const grbf_basis* basis,
                               int eval_count, uint64_t eval_seed,
                               grbf_whitney_summary* summary);

typedef struct grbf_train_options {
  int steps;
  double lr;
  int optimizer; /* 0 = Adam, 1 = L-BFGS */
  int isotropic; /* train a single width per Gaussian instead of a full factor */
  int data_count;
  uint64_t data_seed;
  uint64_t init_seed;
  double fd_step;
  double stop_factor; /* stop once loss < kappa * stop_factor */
} grbf_train_options;

/* Fills the benchmark's published training defaults. */
grbf_status grbf_train_options_default(const grbf_problem* problem, grbf_train_options* out);

typedef struct grbf_train_summary {
  double loss_initial;
  double loss_final;
  double kappa_final;
  double seconds;
  int steps_run;
  int stop_reason; /* 0 completed, 1 condition threshold, 2 non-finite loss */
} grbf_train_summary;

/* Runs the train-the-basis loop from the problem's default initialization.
 * trace_out (per-step loss and condition number) and basis_out (the best
 * basis found) may be NULL. */
grbf_status grbf_train(const grbf_problem* problem, int n, const grbf_train_options* options,
                       grbf_train_summary* summary, grbf_trace** trace_out,
                       grbf_basis** basis_out);

int grbf_trace_length(const grbf_trace* trace);
grbf_status grbf_trace_entry(const grbf_trace* trace, int step, double* loss, double* kappa);
void grbf_trace_destroy(grbf_trace* trace);
const char* grbf_stop_reason_name(int stop_reason);

/* Runs the library's invariant suites, writing one line per suite to stdout.
 * suite_filter selects suites by substring (NULL or "" runs all); mutate != 0
 * corrupts one sign inside the moment expansion, which the agreement suite
 * must detect. failures may be NULL. */
grbf_status grbf_selftest(int mutate, int verbose, const char* suite_filter, int* failures);

#ifdef __cplusplus
}
#endif

#endif /* GRBF_H */
