// Command-line front end for the minimax toolkit.
//
//   run       execute an experiment sweep from a JSON config
//   solve     run one algorithm on one problem, print the best pair + regret
//   regret    oracle query for a given x
//   report    aggregate a result store into CSV reports
//   verify    self-check: budget schedule fixture + descent-direction suite
//   manifest  print the problem registry as JSON
//
// Exit codes: 0 success, 2 usage/configuration error, 1 runtime failure.

#include <minimax/minimax.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string format_vector(const minimax::Vector& v) {
  std::string out = "[";
  char buf[40];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g", v[i]);
    if (i > 0) out += ", ";
    out += buf;
  }
  return out + "]";
}

minimax::Vector parse_vector(const std::string& csv) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    vals.push_back(std::stod(tok));
  }
  minimax::Vector v(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
  return v;
}

std::string output_dir_override(const std::string& flag_value,
                                const std::string& fallback) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("MINIMAX_OUTPUT_DIR"); env && *env) return env;
  return fallback;
}

int cmd_solve(const std::string& problem_id, const std::string& algo,
              std::uint64_t fes, std::uint64_t seed, double s, bool skip_regret) {
  const auto problem = minimax::make_problem(problem_id);
  minimax::AlgorithmSpec spec;
  spec.id = algo;
  spec.params = nlohmann::json{{"s", s}};
  const auto runner = minimax::make_runner(spec);
  const auto trace = runner(problem, fes, seed);
  if (trace.empty()) {
    std::cerr << "error: run produced no solution\n";
    return 1;
  }
  const auto& best = trace.best();
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", best.value);
  std::cout << "problem: " << problem_id << "\n"
            << "algorithm: " << algo << "\n"
            << "budget: " << fes << "\n"
            << "seed: " << seed << "\n"
            << "evals_used: " << trace.evals_used << "\n"
            << "best_x: " << format_vector(best.x) << "\n"
            << "best_y: " << format_vector(best.y) << "\n"
            << "best_value: " << buf << "\n";
  if (!skip_regret) {
    minimax::OracleConfig ocfg;
    const auto rv = minimax::oracle_regret(problem, best.x, ocfg, nullptr, best.y);
    std::snprintf(buf, sizeof buf, "%.12g", rv.worst_case);
    std::cout << "oracle_worst_case: " << buf << "\n";
    if (rv.regret) {
      std::snprintf(buf, sizeof buf, "%.12g", *rv.regret);
      std::cout << "regret: " << buf << "\n";
      if (*rv.regret < -minimax::kOracleSlack)
        std::cout << "note: regret below -1e-06; oracle ensemble was beaten\n";
    }
  }
  return 0;
}

int cmd_verify() {
  using namespace minimax;
  int failures = 0;

  // Budget schedule fixture: ten known cells at lambda1 = lambda2 = 8.
  struct Cell {
    std::uint64_t fes;
    double s;
    int T;
    std::uint64_t inner, outer;
  };
  const Cell cells[] = {
      {100, 0.1, 1, 90, 10},          {100, 0.2, 1, 80, 20},
      {100, 0.3, 1, 70, 30},          {100, 0.4, 1, 60, 40},
      {100, 0.5, 1, 50, 50},          {100000, 0.1, 41, 2195, 243},
      {100000, 0.2, 38, 2105, 526},   {100000, 0.3, 36, 1944, 833},
      {100000, 0.4, 34, 1764, 1176},  {100000, 0.5, 32, 1562, 1562},
  };
  std::cout << "budget schedule fixture (lambda1 = lambda2 = 8):\n";
  std::cout << "  fes      s    T   inner  outer\n";
  for (const auto& c : cells) {
    const auto sched = budget_schedule_for_lambdas(c.fes, c.s, 8, 8);
    const bool ok = sched.iterations == c.T && sched.inner_fes == c.inner &&
                    sched.outer_fes == c.outer;
    if (!ok) ++failures;
    std::printf("  %-8llu %.1f  %-3d %-6llu %-6llu %s\n",
                static_cast<unsigned long long>(c.fes), c.s, sched.iterations,
                static_cast<unsigned long long>(sched.inner_fes),
                static_cast<unsigned long long>(sched.outer_fes), ok ? "ok" : "MISMATCH");
  }

  // Descent-direction agreement: ES estimate vs central finite differences
  // at oracle inner maximizers.
  std::cout << "descent direction agreement (sigma = 1e-3, lambda = 1e5):\n";
  OracleConfig ocfg;
  for (const auto& pid : {std::string("L1"), std::string("L5"), std::string("L6")}) {
    const auto p = make_problem(pid);
    Rng rng(mix_seed(20240501, "verify-" + pid));
    int good = 0;
    const int cases = 20;
    for (int c = 0; c < cases; ++c) {
      const Vector x = rng.uniform_in(p.x_bounds);
      BudgetCounter inner_meter(std::numeric_limits<std::uint64_t>::max());
      auto slice = [&](const Vector& yv) { return evaluate(p, x, yv, inner_meter); };
      RestartPolicy policy;
      Vector y_star =
          maximize_with_restarts(slice, p.y_bounds, 4000, policy, rng).best_point;

      BudgetCounter est_meter(std::numeric_limits<std::uint64_t>::max());
      const Vector est = descent_direction(p, x, y_star, 1e-3, 100000, est_meter, rng);

      Vector fd(p.n_x);
      const double h = 1e-6;
      for (int i = 0; i < p.n_x; ++i) {
        Vector xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        fd[i] = -(p.evaluator(xp, y_star) - p.evaluator(xm, y_star)) / (2.0 * h);
      }
      const double cosine = est.dot(fd) / (est.norm() * fd.norm());
      if (cosine > 0.95) ++good;
    }
    const bool ok = good >= 19;
    if (!ok) ++failures;
    std::printf("  %-3s cosine > 0.95 in %d/%d cases %s\n", pid.c_str(), good, cases,
                ok ? "ok" : "FAIL");
  }

  std::cout << (failures == 0 ? "verify: all checks passed\n"
                              : "verify: FAILURES detected\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"derivative-free minimax optimization toolkit"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "execute an experiment sweep from a config file");
  std::string run_config;
  std::string run_output;
  int run_jobs = 1;
  run_cmd->add_option("--config", run_config, "experiment config (JSON)")->required();
  run_cmd->add_option("--output", run_output, "output directory override");
  run_cmd->add_option("--jobs", run_jobs, "worker threads")->default_val(1);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "run one algorithm on one problem");
  std::string solve_problem, solve_algo;
  std::uint64_t solve_fes = 100000, solve_seed = 0;
  double solve_s = 0.5;
  bool solve_no_regret = false;
  solve_cmd->add_option("--problem", solve_problem, "problem id")->required();
  solve_cmd->add_option("--algo", solve_algo, "algorithm id (e.g. reckless:CR)")->required();
  solve_cmd->add_option("--fes", solve_fes, "evaluation budget")->default_val(100000);
  solve_cmd->add_option("--seed", solve_seed, "run seed")->default_val(0);
  solve_cmd->add_option("--s", solve_s, "descent budget share")->default_val(0.5);
  solve_cmd->add_flag("--no-regret", solve_no_regret, "skip the oracle regret query");

  // regret
  auto* regret_cmd = app.add_subcommand("regret", "oracle worst-case query for a given x");
  std::string regret_problem, regret_x, regret_cache;
  regret_cmd->add_option("--problem", regret_problem, "problem id")->required();
  regret_cmd->add_option("--x", regret_x, "comma-separated x coordinates")->required();
  regret_cmd->add_option("--cache", regret_cache, "oracle cache file");

  // report
  auto* report_cmd = app.add_subcommand("report", "emit CSV reports from a result store");
  std::string report_kind = "convergence", report_store = "results", report_out;
  std::uint64_t report_budget = 0;
  double report_alpha = 0.05;
  report_cmd->add_option("--kind", report_kind, "convergence|scalability|variants|cd")
      ->default_val("convergence");
  report_cmd->add_option("--store", report_store, "result store directory")
      ->default_val("results");
  report_cmd->add_option("--out", report_out, "report output directory");
  report_cmd->add_option("--budget", report_budget, "budget slice for the cd report");
  report_cmd->add_option("--alpha", report_alpha, "significance level (0.05 or 0.10)")
      ->default_val(0.05);

  // verify
  app.add_subcommand("verify", "run built-in self checks");

  // manifest
  app.add_subcommand("manifest", "print the problem registry manifest as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand("run")) {
      std::ifstream in(run_config);
      if (!in) {
        std::cerr << "error: cannot open config '" << run_config << "'\n";
        return 2;
      }
      nlohmann::json j;
      try {
        in >> j;
      } catch (const std::exception& e) {
        std::cerr << "error: malformed config: " << e.what() << "\n";
        return 2;
      }
      minimax::ExperimentConfig cfg;
      try {
        cfg = minimax::ExperimentConfig::from_json(j);
        cfg.output_dir = output_dir_override(run_output, cfg.output_dir);
        cfg.validate();
      } catch (const std::exception& e) {
        std::cerr << "error: invalid config: " << e.what() << "\n";
        return 2;
      }
      minimax::ResultStore store(cfg.output_dir);
      const auto summary = minimax::run_experiment(cfg, store, run_jobs, &std::cerr);
      std::cout << "executed " << summary.executed << ", skipped " << summary.skipped
                << ", failed " << summary.failed << "; store: " << store.records_path()
                << "\n";
      return summary.failed == 0 ? 0 : 1;
    }

    if (app.got_subcommand("solve"))
      return cmd_solve(solve_problem, solve_algo, solve_fes, solve_seed, solve_s,
                       solve_no_regret);

    if (app.got_subcommand("regret")) {
      const auto problem = minimax::make_problem(regret_problem);
      const auto x = parse_vector(regret_x);
      minimax::OracleConfig ocfg;
      minimax::OracleCache cache(regret_cache);
      const auto rv = minimax::oracle_regret(problem, x, ocfg,
                                             regret_cache.empty() ? nullptr : &cache);
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.12g", rv.worst_case);
      std::cout << "worst_case: " << buf << "\n";
      if (rv.regret) {
        std::snprintf(buf, sizeof buf, "%.12g", *rv.regret);
        std::cout << "regret: " << buf << "\n";
      }
      return 0;
    }

    if (app.got_subcommand("report")) {
      const std::string out = output_dir_override(report_out, report_store);
      minimax::ResultStore store(report_store);
      std::optional<std::uint64_t> budget;
      if (report_budget > 0) budget = report_budget;
      const auto paths = minimax::emit_reports(
          store, minimax::parse_report_kind(report_kind), out, budget, report_alpha);
      for (const auto& p : paths) std::cout << p << "\n";
      return 0;
    }

    if (app.got_subcommand("verify")) return cmd_verify();

    if (app.got_subcommand("manifest")) {
      std::cout << minimax::problem_manifest().dump(2) << "\n";
      return 0;
    }
  } catch (const minimax::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
