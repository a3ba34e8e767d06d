#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include <grbf/grbf.h>

namespace {

using nlohmann::json;

constexpr int kEvalCount = 4096;

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

int fail_status(const char* what, grbf_status status) {
  std::cerr << "error: " << what << ": " << grbf_status_message(status);
  const char* detail = grbf_last_error();
  if (detail && *detail) std::cerr << " (" << detail << ")";
  std::cerr << "\n";
  return 1;
}

// Empty path writes to stdout.
bool write_table(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return true;
  }
  std::ofstream file(path);
  if (!file) {
    std::cerr << "error: cannot open " << path << " for writing\n";
    return false;
  }
  file << content;
  return true;
}

struct ProblemHandle {
  grbf_problem* ptr = nullptr;
  ~ProblemHandle() { grbf_problem_destroy(ptr); }
};
struct BasisHandle {
  grbf_basis* ptr = nullptr;
  ~BasisHandle() { grbf_basis_destroy(ptr); }
};
struct TraceHandle {
  grbf_trace* ptr = nullptr;
  ~TraceHandle() { grbf_trace_destroy(ptr); }
};

int solve_once(int problem_id, int n, double gamma, std::uint64_t seed,
               grbf_solve_summary& out) {
  ProblemHandle problem;
  if (grbf_status s = grbf_problem_create(problem_id, &problem.ptr))
    return fail_status("problem", s);
  BasisHandle basis;
  if (grbf_status s = grbf_basis_create_default(problem.ptr, n, seed, &basis.ptr))
    return fail_status("basis", s);
  if (grbf_status s = grbf_solve(problem.ptr, basis.ptr, gamma, kEvalCount, seed, &out, nullptr))
    return fail_status("solve", s);
  return 0;
}

int cmd_selftest(bool mutate, bool verbose, const std::string& suite) {
  int failures = 0;
  if (grbf_status s = grbf_selftest(mutate ? 1 : 0, verbose ? 1 : 0, suite.c_str(), &failures))
    return fail_status("selftest", s);
  return failures == 0 ? 0 : 1;
}

int cmd_solve(int problem_id, int n, double gamma, std::uint64_t seed,
              const std::string& out_path) {
  grbf_solve_summary summary{};
  if (int rc = solve_once(problem_id, n, gamma, seed, summary)) return rc;
  if (!out_path.empty()) {
    std::string csv = "n,rel_mse_solve,kappa\n";
    csv += std::to_string(summary.n) + "," + sci(summary.rel_mse) + "," + sci(summary.kappa) +
           "\n";
    if (!write_table(out_path, csv)) return 1;
  }
  const json j{{"command", "solve"},       {"problem", problem_id}, {"n", summary.n},
               {"gamma", summary.gamma},   {"seed", seed},          {"rel_mse", summary.rel_mse},
               {"kappa", summary.kappa}};
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_convergence(int problem_id, const std::vector<int>& sizes, double gamma,
                    std::uint64_t seed, const std::string& out_path) {
  std::string csv = "n,rel_mse_solve,kappa\n";
  json rows = json::array();
  for (int n : sizes) {
    grbf_solve_summary summary{};
    if (int rc = solve_once(problem_id, n, gamma, seed, summary)) return rc;
    csv += std::to_string(summary.n) + "," + sci(summary.rel_mse) + "," + sci(summary.kappa) +
           "\n";
    rows.push_back({{"n", summary.n}, {"rel_mse", summary.rel_mse}, {"kappa", summary.kappa}});
  }
  if (!write_table(out_path, csv)) return 1;
  const json j{{"command", "convergence"},
               {"problem", problem_id},
               {"seed", seed},
               {"rows", rows.size()},
               {"results", rows}};
  std::cout << j.dump() << "\n";
  return 0;
}

struct TrainFlags {
  int problem = 1;
  int n = 16;
  int steps = 0;
  double lr = 0.0;
  std::string optimizer = "adam";
  std::uint64_t seed = 1;
  bool full_scale = false;
  bool steps_given = false;
  bool lr_given = false;
  std::string out;
};

int run_training(grbf_problem* problem, int n, const TrainFlags& flags,
                 grbf_train_options& options, grbf_train_summary& summary, grbf_trace** trace,
                 grbf_basis** trained) {
  if (grbf_status s = grbf_train_options_default(problem, &options))
    return fail_status("defaults", s);
  if (flags.full_scale) {
    options.data_count = 65536;
    options.steps = 10000;
  }
  if (flags.steps_given) options.steps = flags.steps;
  if (flags.lr_given) options.lr = flags.lr;
  options.optimizer = flags.optimizer == "lbfgs" ? 1 : 0;
  options.data_seed = flags.seed;
  options.init_seed = flags.seed;
  if (grbf_status s = grbf_train(problem, n, &options, &summary, trace, trained))
    return fail_status("train", s);
  return 0;
}

int cmd_train(const TrainFlags& flags) {
  ProblemHandle problem;
  if (grbf_status s = grbf_problem_create(flags.problem, &problem.ptr))
    return fail_status("problem", s);
  grbf_train_options options{};
  grbf_train_summary summary{};
  TraceHandle trace;
  if (int rc = run_training(problem.ptr, flags.n, flags, options, summary, &trace.ptr, nullptr))
    return rc;

  std::string csv = "step,loss,kappa\n";
  for (int i = 0; i < grbf_trace_length(trace.ptr); ++i) {
    double loss = 0.0, kappa = 0.0;
    grbf_trace_entry(trace.ptr, i, &loss, &kappa);
    csv += std::to_string(i + 1) + "," + sci(loss) + "," + sci(kappa) + "\n";
  }
  if (!write_table(flags.out, csv)) return 1;

  const json j{{"command", "train"},
               {"problem", flags.problem},
               {"n", flags.n},
               {"steps", options.steps},
               {"lr", options.lr},
               {"optimizer", options.optimizer == 1 ? "lbfgs" : "adam"},
               {"data_count", options.data_count},
               {"seed", flags.seed},
               {"loss_initial", summary.loss_initial},
               {"loss_final", summary.loss_final},
               {"kappa_final", summary.kappa_final},
               {"steps_run", summary.steps_run},
               {"stop_reason", grbf_stop_reason_name(summary.stop_reason)},
               {"seconds", summary.seconds}};
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_whitney(int n, std::uint64_t seed, bool do_train, const TrainFlags& train_flags,
                const std::string& out_path) {
  ProblemHandle problem;
  if (grbf_status s = grbf_problem_create(4, &problem.ptr)) return fail_status("problem", s);
  BasisHandle basis;
  if (grbf_status s = grbf_basis_create_default(problem.ptr, n, seed, &basis.ptr))
    return fail_status("basis", s);
  grbf_whitney_summary solve_summary{};
  if (grbf_status s =
          grbf_whitney_solve(problem.ptr, basis.ptr, kEvalCount, seed, &solve_summary))
    return fail_status("solve", s);

  std::string csv = "mode,total,mse_u,mse_f,kappa\n";
  csv += "solve," + sci(solve_summary.total_error) + "," + sci(solve_summary.mse_u) + "," +
         sci(solve_summary.mse_f) + "," + sci(solve_summary.kappa) + "\n";
  json j{{"command", "whitney"},
         {"n", n},
         {"seed", seed},
         {"solve",
          {{"total", solve_summary.total_error},
           {"mse_u", solve_summary.mse_u},
           {"mse_f", solve_summary.mse_f},
           {"kappa", solve_summary.kappa}}}};

  if (do_train) {
    grbf_train_options options{};
    grbf_train_summary train_summary{};
    BasisHandle trained;
    if (int rc = run_training(problem.ptr, n, train_flags, options, train_summary, nullptr,
                              &trained.ptr))
      return rc;
    grbf_whitney_summary after{};
    if (grbf_status s = grbf_whitney_solve(problem.ptr, trained.ptr, kEvalCount, seed, &after))
      return fail_status("trained solve", s);
    csv += "train," + sci(after.total_error) + "," + sci(after.mse_u) + "," + sci(after.mse_f) +
           "," + sci(after.kappa) + "\n";
    j["train"] = {{"total", after.total_error},
                  {"mse_u", after.mse_u},
                  {"mse_f", after.mse_f},
                  {"kappa", after.kappa},
                  {"loss_initial", train_summary.loss_initial},
                  {"loss_final", train_summary.loss_final},
                  {"steps_run", train_summary.steps_run},
                  {"stop_reason", grbf_stop_reason_name(train_summary.stop_reason)},
                  {"seconds", train_summary.seconds}};
  }

  if (!out_path.empty() && !write_table(out_path, csv)) return 1;
  std::cout << j.dump() << "\n";
  return 0;
}

bool power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian radial basis function variational solver benchmarks"};
  app.require_subcommand(1);
  app.footer(
      "CSV schemas:\n"
      "  solve, convergence: n,rel_mse_solve,kappa\n"
      "  train:              step,loss,kappa\n"
      "  whitney:            mode,total,mse_u,mse_f,kappa\n"
      "Values use scientific notation with 13 significant digits. Tables go to\n"
      "--out when given (convergence and train print to stdout otherwise); the\n"
      "last stdout line of every run is a one-line JSON summary.\n"
      "A --config file holds key=value pairs under a [subcommand] section\n"
      "(dotted keys like solve.n work too); explicit flags win over config\n"
      "values.");
  app.set_config("--config", "", "key=value configuration file");

  auto* selftest = app.add_subcommand("selftest", "Run the library invariant suites");
  selftest->fallthrough();
  bool mutate = false, verbose = false;
  std::string suite;
  selftest->add_flag("--mutate", mutate,
                     "corrupt one sign inside the moment expansion (the agreement suite must "
                     "then fail, and the exit code is nonzero)");
  selftest->add_flag("--verbose", verbose, "print every check, not only failures");
  selftest->add_option("--suite", suite, "substring filter on suite names");

  auto* solve = app.add_subcommand("solve", "Assemble and solve one scalar benchmark");
  solve->fallthrough();
  int s_problem = 1, s_n = 16;
  double s_gamma = -1.0;
  std::uint64_t s_seed = 1;
  std::string s_out;
  solve->add_option("--problem", s_problem, "benchmark id")->check(CLI::Range(1, 3))->required();
  solve->add_option("--n", s_n, "basis size")->check(CLI::PositiveNumber);
  solve->add_option("--gamma", s_gamma, "boundary penalty weight (default: 16 n when bounded)");
  solve->add_option("--seed", s_seed, "seed for basis placement and evaluation points");
  solve->add_option("--out", s_out, "write the one-row CSV here");

  auto* conv = app.add_subcommand("convergence", "Solve over a range of basis sizes");
  conv->fallthrough();
  int c_problem = 1, c_n = 0, c_n_min = 8, c_n_max = 128;
  double c_gamma = -1.0;
  std::uint64_t c_seed = 1;
  std::string c_out;
  conv->add_option("--problem", c_problem, "benchmark id")->check(CLI::Range(1, 3))->required();
  auto* c_n_opt =
      conv->add_option("--n", c_n, "single basis size")->check(CLI::PositiveNumber);
  conv->add_option("--n-min", c_n_min, "smallest basis size (power of two)")
      ->excludes(c_n_opt);
  conv->add_option("--n-max", c_n_max, "largest basis size (power of two)")->excludes(c_n_opt);
  conv->add_option("--gamma", c_gamma, "boundary penalty weight (default: 16 n when bounded)");
  conv->add_option("--seed", c_seed, "seed for basis placement and evaluation points");
  conv->add_option("--out", c_out, "write the CSV here instead of stdout");

  auto* train = app.add_subcommand("train", "Train the basis on one benchmark");
  train->fallthrough();
  TrainFlags t;
  train->add_option("--problem", t.problem, "benchmark id")->check(CLI::Range(1, 4))->required();
  train->add_option("--n", t.n, "basis size")->check(CLI::PositiveNumber);
  train->add_option("--steps", t.steps, "optimizer steps (default: problem setting)")
      ->check(CLI::PositiveNumber);
  train->add_option("--lr", t.lr, "learning rate (default: problem setting)");
  train->add_option("--optimizer", t.optimizer, "adam or lbfgs")
      ->check(CLI::IsMember({"adam", "lbfgs"}));
  train->add_option("--seed", t.seed, "seed for data sampling and basis initialization");
  train->add_flag("--full-scale", t.full_scale,
                  "use the published large-scale settings (65536 points, 10000 steps)");
  train->add_option("--out", t.out, "write the per-step CSV here instead of stdout");

  auto* whitney = app.add_subcommand("whitney", "Mixed first-order benchmark");
  whitney->fallthrough();
  int w_n = 8;
  std::uint64_t w_seed = 1;
  bool w_train = false;
  TrainFlags wt;
  std::string w_out;
  whitney->add_option("--n", w_n, "basis size")->check(CLI::PositiveNumber);
  whitney->add_option("--seed", w_seed, "seed for basis placement and evaluation points");
  whitney->add_flag("--train", w_train, "also train the basis and report the trained errors");
  whitney->add_option("--steps", wt.steps, "optimizer steps when training")
      ->check(CLI::PositiveNumber);
  whitney->add_option("--lr", wt.lr, "learning rate when training");
  whitney->add_option("--optimizer", wt.optimizer, "adam or lbfgs")
      ->check(CLI::IsMember({"adam", "lbfgs"}));
  whitney->add_option("--out", w_out, "write the CSV here");

  CLI11_PARSE(app, argc, argv);

  if (*selftest) return cmd_selftest(mutate, verbose, suite);
  if (*solve) return cmd_solve(s_problem, s_n, s_gamma, s_seed, s_out);
  if (*conv) {
    std::vector<int> sizes;
    if (conv->count("--n")) {
      sizes.push_back(c_n);
    } else {
      if (!power_of_two(c_n_min) || !power_of_two(c_n_max) || c_n_min > c_n_max) {
        std::cerr << "error: --n-min and --n-max must be powers of two with n-min <= n-max\n";
        return 1;
      }
      for (int v = c_n_min; v <= c_n_max; v *= 2) sizes.push_back(v);
    }
    return cmd_convergence(c_problem, sizes, c_gamma, c_seed, c_out);
  }
  if (*train) {
    t.steps_given = train->count("--steps") > 0;
    t.lr_given = train->count("--lr") > 0;
    return cmd_train(t);
  }
  if (*whitney) {
    wt.problem = 4;
    wt.n = w_n;
    wt.seed = w_seed;
    wt.steps_given = whitney->count("--steps") > 0;
    wt.lr_given = whitney->count("--lr") > 0;
    return cmd_whitney(w_n, w_seed, w_train, wt, w_out);
  }
  return 0;
}
