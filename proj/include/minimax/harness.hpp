#pragma once

// Fixed-budget experiment protocol: every (problem, algorithm, budget, run)
// cell is a fresh, independently seeded run. Records append to a JSONL
// store keyed for idempotent re-invocation; reports aggregate the raw
// records on every pass (no cached aggregates).

#include "minimax/coevolution.hpp"
#include "minimax/common.hpp"
#include "minimax/mmde.hpp"
#include "minimax/oracle.hpp"
#include "minimax/problems.hpp"
#include "minimax/reckless.hpp"
#include "minimax/stats.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <thread>

namespace minimax {

struct empty_report_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Algorithm registry

struct AlgorithmSpec {
  std::string id;  // "reckless:<variant>", "coeva", "coevp", "mmde"
  nlohmann::json params = nlohmann::json::object();  // overrides (s, population_size, ...)
};

using AlgorithmRunner =
    std::function<RunTrace(const MinimaxProblem&, std::uint64_t budget, std::uint64_t seed)>;

inline AlgorithmRunner make_runner(const AlgorithmSpec& spec) {
  const auto& params = spec.params;
  if (spec.id.rfind("reckless:", 0) == 0) {
    const auto variant = resolve_variant(spec.id.substr(9));
    RecklessConfig base;
    base.variant = variant;
    base.s = params.value("s", 0.5);
    base.nes_eta = params.value("nes_eta", base.nes_eta);
    return [base](const MinimaxProblem& p, std::uint64_t budget, std::uint64_t seed) {
      RecklessConfig cfg = base;
      cfg.total_fes = budget;
      cfg.seed = seed;
      return run_reckless(p, cfg).trace;
    };
  }
  if (spec.id == "coeva" || spec.id == "coevp") {
    CoevConfig base;
    base.population_size = params.value("population_size", base.population_size);
    base.mutation_prob = params.value("mutation_prob", base.mutation_prob);
    base.tournament_size = params.value("tournament_size", base.tournament_size);
    base.replaced_per_gen = params.value("replaced_per_gen", base.replaced_per_gen);
    const bool alternating = spec.id == "coeva";
    return [base, alternating](const MinimaxProblem& p, std::uint64_t budget,
                               std::uint64_t seed) {
      CoevConfig cfg = base;
      cfg.seed = seed;
      return (alternating ? run_coev_alternating(p, cfg, budget)
                          : run_coev_parallel(p, cfg, budget))
          .trace;
    };
  }
  if (spec.id == "mmde") {
    MmdeConfig base;
    base.population_size = params.value("population_size", base.population_size);
    base.differential_weight = params.value("differential_weight", base.differential_weight);
    base.crossover_prob = params.value("crossover_prob", base.crossover_prob);
    base.trust_evals = params.value("trust_evals", base.trust_evals);
    return [base](const MinimaxProblem& p, std::uint64_t budget, std::uint64_t seed) {
      MmdeConfig cfg = base;
      cfg.seed = seed;
      return run_mmde(p, cfg, budget);
    };
  }
  throw config_error("make_runner: unknown algorithm id '" + spec.id + "'");
}

// ---------------------------------------------------------------------------
// Experiment configuration

struct ExperimentConfig {
  std::vector<std::string> problems;
  std::vector<AlgorithmSpec> algorithms;
  std::vector<std::uint64_t> budgets;  // ascending
  int runs = 60;
  std::uint64_t base_seed = 1;
  std::string output_dir = "results";
  OracleConfig oracle;

  void validate() const {
    if (problems.empty() || algorithms.empty() || budgets.empty())
      throw config_error("ExperimentConfig: problems, algorithms and budgets required");
    if (runs < 1) throw config_error("ExperimentConfig: runs must be >= 1");
    if (!std::is_sorted(budgets.begin(), budgets.end()))
      throw config_error("ExperimentConfig: budgets must be ascending");
    for (const auto& id : problems) make_problem(id);  // resolvable
    for (const auto& a : algorithms) make_runner(a);
  }

  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.problems = j.at("problems").get<std::vector<std::string>>();
    for (const auto& a : j.at("algorithms")) {
      AlgorithmSpec spec;
      if (a.is_string()) {
        spec.id = a.get<std::string>();
      } else {
        spec.id = a.at("id").get<std::string>();
        spec.params = a;
        spec.params.erase("id");
      }
      cfg.algorithms.push_back(std::move(spec));
    }
    cfg.budgets = j.at("budgets").get<std::vector<std::uint64_t>>();
    cfg.runs = j.value("runs", 60);
    cfg.base_seed = j.value("base_seed", std::uint64_t{1});
    cfg.output_dir = j.value("output_dir", std::string("results"));
    if (j.contains("oracle")) {
      const auto& o = j["oracle"];
      cfg.oracle.cma_restarts = o.value("cma_restarts", cfg.oracle.cma_restarts);
      cfg.oracle.cma_budget = o.value("cma_budget", cfg.oracle.cma_budget);
      cfg.oracle.de_budget = o.value("de_budget", cfg.oracle.de_budget);
      cfg.oracle.local_starts = o.value("local_starts", cfg.oracle.local_starts);
      cfg.oracle.local_budget = o.value("local_budget", cfg.oracle.local_budget);
      cfg.oracle.grid_points_1d = o.value("grid_points_1d", cfg.oracle.grid_points_1d);
      cfg.oracle.grid_points_2d = o.value("grid_points_2d", cfg.oracle.grid_points_2d);
      cfg.oracle.seed = o.value("seed", cfg.oracle.seed);
    }
    return cfg;
  }
};

// ---------------------------------------------------------------------------
// Result store (JSONL, append-only)

struct RunRecord {
  std::string problem;
  std::string algorithm;
  std::uint64_t budget = 0;
  int run = 0;
  std::uint64_t seed = 0;
  double value = 0.0;  // L(x, y_worst) as observed by the algorithm
  std::vector<double> x;
  std::vector<double> y;
  std::uint64_t evals_used = 0;
  double worst_case = 0.0;  // oracle estimate of max_y L(x, y)
  double regret = 0.0;
  double wall_ms = 0.0;  // informational; excluded from determinism checks

  std::string key() const {
    return problem + "|" + algorithm + "|" + std::to_string(budget) + "|" +
           std::to_string(run);
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"problem", problem},   {"algorithm", algorithm},
                          {"budget", budget},     {"run", run},
                          {"seed", seed},         {"value", value},
                          {"x", x},               {"y", y},
                          {"evals_used", evals_used}, {"worst_case", worst_case},
                          {"regret", regret},     {"wall_ms", wall_ms}};
  }

  static RunRecord from_json(const nlohmann::json& j) {
    RunRecord r;
    r.problem = j.at("problem").get<std::string>();
    r.algorithm = j.at("algorithm").get<std::string>();
    r.budget = j.at("budget").get<std::uint64_t>();
    r.run = j.at("run").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.value = j.at("value").get<double>();
    r.x = j.at("x").get<std::vector<double>>();
    r.y = j.at("y").get<std::vector<double>>();
    r.evals_used = j.at("evals_used").get<std::uint64_t>();
    r.worst_case = j.at("worst_case").get<double>();
    r.regret = j.at("regret").get<double>();
    r.wall_ms = j.value("wall_ms", 0.0);
    return r;
  }
};

class ResultStore {
 public:
  explicit ResultStore(std::string dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
    std::ifstream in(records_path());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        auto r = RunRecord::from_json(nlohmann::json::parse(line));
        keys_.insert(r.key());
        records_.push_back(std::move(r));
      } catch (const std::exception& e) {
        std::cerr << "warning: skipping unreadable record: " << e.what() << "\n";
      }
    }
  }

  const std::string& dir() const { return dir_; }
  std::string records_path() const { return dir_ + "/records.jsonl"; }

  bool contains(const std::string& key) const { return keys_.count(key) > 0; }
  std::size_t size() const { return records_.size(); }
  const std::vector<RunRecord>& records() const { return records_; }

  void append(const RunRecord& r) {
    std::ofstream out(records_path(), std::ios::app);
    out << r.to_json().dump() << "\n";
    keys_.insert(r.key());
    records_.push_back(r);
  }

 private:
  std::string dir_;
  std::set<std::string> keys_;
  std::vector<RunRecord> records_;
};

// ---------------------------------------------------------------------------
// Sweep

struct SweepSummary {
  std::size_t executed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
};

namespace detail {

struct SweepTask {
  std::string problem;
  AlgorithmSpec algorithm;
  std::string algorithm_id;
  std::uint64_t budget = 0;
  int run = 0;
};

inline RunRecord execute_task(const SweepTask& task, const ExperimentConfig& cfg,
                              OracleCache& cache) {
  const auto problem = make_problem(task.problem);
  const auto runner = make_runner(task.algorithm);
  // Deterministic per-run stream: the record key fully determines the seed,
  // so different budgets are independent runs rather than truncations.
  const std::uint64_t run_seed = cfg.base_seed + static_cast<std::uint64_t>(task.run);
  const std::uint64_t stream =
      mix_seed(run_seed, task.problem + "|" + task.algorithm_id + "|" +
                             std::to_string(task.budget));
  const auto t0 = std::chrono::steady_clock::now();
  RunTrace trace = runner(problem, task.budget, stream);
  const auto t1 = std::chrono::steady_clock::now();
  if (trace.empty())
    throw std::runtime_error("runner returned an empty trace");

  const auto& best = trace.best();
  RunRecord rec;
  rec.problem = task.problem;
  rec.algorithm = task.algorithm_id;
  rec.budget = task.budget;
  rec.run = task.run;
  rec.seed = run_seed;
  rec.value = best.value;
  rec.x.assign(best.x.data(), best.x.data() + best.x.size());
  rec.y.assign(best.y.data(), best.y.data() + best.y.size());
  rec.evals_used = trace.evals_used;
  const auto rv = oracle_regret(problem, best.x, cfg.oracle, &cache, best.y);
  rec.worst_case = rv.worst_case;
  rec.regret = rv.regret.value_or(rv.worst_case);
  rec.wall_ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 - t0)
          .count();
  return rec;
}

}  // namespace detail

// Runs every missing (problem, algorithm, budget, run) cell. Tasks execute
// on `jobs` workers but records land in deterministic task order. Failures
// are logged and skipped; they do not abort the sweep.
inline SweepSummary run_experiment(const ExperimentConfig& cfg, ResultStore& store,
                                   int jobs = 1, std::ostream* log = nullptr) {
  cfg.validate();
  OracleCache cache(cfg.oracle.cache_path.empty() ? store.dir() + "/oracle_cache.txt"
                                                  : cfg.oracle.cache_path);

  std::vector<detail::SweepTask> tasks;
  SweepSummary summary;
  for (const auto& problem : cfg.problems)
    for (const auto& algo : cfg.algorithms)
      for (const auto budget : cfg.budgets)
        for (int run = 0; run < cfg.runs; ++run) {
          detail::SweepTask t{problem, algo, algo.id, budget, run};
          RunRecord probe;
          probe.problem = problem;
          probe.algorithm = algo.id;
          probe.budget = budget;
          probe.run = run;
          if (store.contains(probe.key()))
            ++summary.skipped;
          else
            tasks.push_back(std::move(t));
        }

  std::vector<std::optional<RunRecord>> results(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  jobs = std::max(1, jobs);
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        results[i] = detail::execute_task(tasks[i], cfg, cache);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (results[i]) {
      store.append(*results[i]);
      ++summary.executed;
    } else {
      ++summary.failed;
      if (log)
        *log << "run failed: " << tasks[i].problem << "/" << tasks[i].algorithm_id
             << "@" << tasks[i].budget << " run " << tasks[i].run << ": " << errors[i]
             << "\n";
    }
  }
  return summary;
}

// ---------------------------------------------------------------------------
// Reports

enum class ReportKind { convergence, scalability, variants, cd };

inline ReportKind parse_report_kind(const std::string& s) {
  if (s == "convergence") return ReportKind::convergence;
  if (s == "scalability") return ReportKind::scalability;
  if (s == "variants") return ReportKind::variants;
  if (s == "cd") return ReportKind::cd;
  throw config_error("unknown report kind '" + s + "'");
}

namespace detail {

struct Aggregate {
  std::vector<double> regrets;
  double mean() const {
    double acc = 0.0;
    for (double r : regrets) acc += r;
    return regrets.empty() ? 0.0 : acc / static_cast<double>(regrets.size());
  }
  double stddev() const {
    if (regrets.size() < 2) return 0.0;
    const double m = mean();
    double acc = 0.0;
    for (double r : regrets) acc += (r - m) * (r - m);
    return std::sqrt(acc / static_cast<double>(regrets.size()));
  }
  double median() const {
    std::vector<double> s = regrets;
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    if (n == 0) return 0.0;
    return n % 2 == 1 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
  }
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Dimension of a scaled problem id ("L1-n20" -> 20; "L1" -> its default n).
inline int problem_dimension(const std::string& id) {
  const auto pos = id.find("-n");
  if (pos == std::string::npos) return make_problem(id).n_x;
  return std::stoi(id.substr(pos + 2));
}

inline std::string family_of(const std::string& id) {
  const auto pos = id.find("-n");
  return pos == std::string::npos ? id : id.substr(0, pos);
}

}  // namespace detail

// Writes a CSV per problem (convergence, variants: x = budget; scalability:
// x = dimension, grouped per family) or the CD summary. Returns the paths
// written. Throws empty_report_error when the requested slice has no data.
inline std::vector<std::string> emit_reports(const ResultStore& store, ReportKind kind,
                                             const std::string& out_dir,
                                             std::optional<std::uint64_t> cd_budget = {},
                                             double alpha = 0.05) {
  std::filesystem::create_directories(out_dir);
  const auto& records = store.records();
  std::vector<std::string> written;

  if (kind == ReportKind::convergence || kind == ReportKind::variants) {
    const bool variants_only = kind == ReportKind::variants;
    // (problem, budget, algorithm) -> aggregate
    std::map<std::string, std::map<std::uint64_t, std::map<std::string, detail::Aggregate>>>
        grouped;
    for (const auto& r : records) {
      if (variants_only && r.algorithm.rfind("reckless:", 0) != 0) continue;
      grouped[r.problem][r.budget][r.algorithm].regrets.push_back(r.regret);
    }
    if (grouped.empty()) throw empty_report_error("empty slice: no matching records");
    for (const auto& [problem, by_budget] : grouped) {
      const std::string path = out_dir + "/" + (variants_only ? "variants_" : "convergence_") +
                               problem + ".csv";
      std::ofstream out(path);
      out << "budget,algorithm,mean_regret,std_regret,median_regret,runs\n";
      for (const auto& [budget, by_algo] : by_budget)
        for (const auto& [algo, agg] : by_algo)
          out << budget << ',' << algo << ',' << detail::format_double(agg.mean()) << ','
              << detail::format_double(agg.stddev()) << ','
              << detail::format_double(agg.median()) << ',' << agg.regrets.size() << "\n";
      written.push_back(path);
    }
    return written;
  }

  if (kind == ReportKind::scalability) {
    // (family, dimension, algorithm) -> aggregate
    std::map<std::string, std::map<int, std::map<std::string, detail::Aggregate>>> grouped;
    for (const auto& r : records)
      grouped[detail::family_of(r.problem)][detail::problem_dimension(r.problem)]
             [r.algorithm]
                 .regrets.push_back(r.regret);
    if (grouped.empty()) throw empty_report_error("empty slice: no matching records");
    for (const auto& [family, by_dim] : grouped) {
      const std::string path = out_dir + "/scalability_" + family + ".csv";
      std::ofstream out(path);
      out << "dimension,algorithm,mean_regret,std_regret,median_regret,runs\n";
      for (const auto& [dim, by_algo] : by_dim)
        for (const auto& [algo, agg] : by_algo)
          out << dim << ',' << algo << ',' << detail::format_double(agg.mean()) << ','
              << detail::format_double(agg.stddev()) << ','
              << detail::format_double(agg.median()) << ',' << agg.regrets.size() << "\n";
      written.push_back(path);
    }
    return written;
  }

  // CD summary at one budget (default: the largest present).
  std::uint64_t budget = 0;
  if (cd_budget) {
    budget = *cd_budget;
  } else {
    for (const auto& r : records) budget = std::max(budget, r.budget);
  }
  std::map<std::string, std::map<std::string, detail::Aggregate>> by_problem;
  std::set<std::string> algos;
  for (const auto& r : records)
    if (r.budget == budget) {
      by_problem[r.problem][r.algorithm].regrets.push_back(r.regret);
      algos.insert(r.algorithm);
    }
  if (by_problem.empty() || algos.size() < 2)
    throw empty_report_error("empty slice: need records for >= 2 algorithms at budget " +
                             std::to_string(budget));

  std::vector<std::string> col_labels(algos.begin(), algos.end());
  std::vector<std::string> row_labels;
  std::vector<std::vector<double>> values;
  for (const auto& [problem, by_algo] : by_problem) {
    std::vector<double> row;
    bool complete = true;
    for (const auto& a : col_labels) {
      auto it = by_algo.find(a);
      if (it == by_algo.end()) {
        complete = false;
        break;
      }
      row.push_back(it->second.mean());
    }
    if (complete) {
      row_labels.push_back(problem);
      values.push_back(std::move(row));
    }
  }
  if (values.size() < 2)
    throw empty_report_error("empty slice: need >= 2 problems covered by all algorithms");

  const auto matrix = RankMatrix::from_values(row_labels, col_labels, values);
  const auto fr = friedman_test(matrix);
  const double cd = nemenyi_cd(fr.k, fr.N, alpha);
  const auto avg = matrix.average_ranks();

  const std::string path = out_dir + "/cd_summary.csv";
  std::ofstream out(path);
  out << "# friedman_statistic," << detail::format_double(fr.statistic) << "\n";
  out << "# p_value," << detail::format_double(fr.p_value) << "\n";
  out << "# k," << fr.k << "\n# N," << fr.N << "\n";
  out << "# alpha," << detail::format_double(alpha) << "\n";
  out << "# critical_difference," << detail::format_double(cd) << "\n";
  out << "# budget," << budget << "\n";
  out << "algorithm,average_rank\n";
  for (std::size_t j = 0; j < col_labels.size(); ++j)
    out << col_labels[j] << ',' << detail::format_double(avg[j]) << "\n";
  out << "algorithm_a,algorithm_b,rank_difference,significant\n";
  for (std::size_t a = 0; a < col_labels.size(); ++a)
    for (std::size_t b = a + 1; b < col_labels.size(); ++b) {
      const double diff = std::abs(avg[a] - avg[b]);
      out << col_labels[a] << ',' << col_labels[b] << ','
          << detail::format_double(diff) << ',' << (diff > cd ? 1 : 0) << "\n";
    }
  written.push_back(path);
  return written;
}

}  // namespace minimax
