#pragma once

// Alternating minimax driver: each iteration computes an approximate inner
// maximizer with restarted CMA-ES, records the best (x, max_y L) pair seen,
// then takes an ES descent step on x against that maximizer. A Powell-style
// momentum check can trigger a joint uniform re-draw of (x, y).

#include "minimax/cma.hpp"
#include "minimax/common.hpp"
#include "minimax/es.hpp"
#include "minimax/problems.hpp"

namespace minimax {

// ---------------------------------------------------------------------------
// Variants

enum class OuterEngine { nes, cma };

struct RecklessVariant {
  OuterEngine engine = OuterEngine::cma;
  bool antithetic = false;
  bool powell_restart = false;
};

// Variant codes combine: A (antithetic), exactly one of N (NES) or C
// (CMA-ES), R (momentum restart). Examples: "CR", "N", "ACR", "AN".
inline RecklessVariant resolve_variant(std::string_view code) {
  RecklessVariant v;
  bool have_engine = false;
  bool have_a = false, have_r = false;
  for (char ch : code) {
    switch (ch) {
      case 'A':
        if (have_a) throw config_error("resolve_variant: duplicate 'A'");
        have_a = true;
        v.antithetic = true;
        break;
      case 'R':
        if (have_r) throw config_error("resolve_variant: duplicate 'R'");
        have_r = true;
        v.powell_restart = true;
        break;
      case 'N':
      case 'C':
        if (have_engine)
          throw config_error("resolve_variant: exactly one of 'N' or 'C' expected");
        have_engine = true;
        v.engine = ch == 'N' ? OuterEngine::nes : OuterEngine::cma;
        break;
      default:
        throw config_error(std::string("resolve_variant: unknown symbol '") + ch + "'");
    }
  }
  if (!have_engine)
    throw config_error("resolve_variant: variant must name an engine ('N' or 'C')");
  return v;
}

inline std::string variant_code(const RecklessVariant& v) {
  std::string code;
  if (v.antithetic) code += 'A';
  code += v.engine == OuterEngine::nes ? 'N' : 'C';
  if (v.powell_restart) code += 'R';
  return code;
}

// ---------------------------------------------------------------------------
// Budget schedule
//
//   T = floor( sqrt( total / (6 (lambda1 + 2 s lambda2)) ) )
//   v = floor(total / T),  inner = floor((1-s) total / T),  outer = floor(s total / T)
//
// The iteration count plans six evolution rounds per engine pairing (five
// descent-share levels plus initialization). The inner/outer shares are cut
// from the unrounded per-iteration budget total/T; rounding v first would
// lose a unit on some share levels.

namespace detail {
// Absorbs binary representation error of decimal share values before floor.
inline double floor_share(double v) { return std::floor(v + 1e-9); }
inline constexpr double kScheduleRounds = 6.0;
}  // namespace detail

struct BudgetSchedule {
  int iterations = 0;            // T
  std::uint64_t per_iteration = 0;  // v
  std::uint64_t inner_fes = 0;   // (1-s) v
  std::uint64_t outer_fes = 0;   // s v
};

inline BudgetSchedule budget_schedule_for_lambdas(std::uint64_t total_fes, double s,
                                                  int lambda1, int lambda2) {
  if (!(s > 0.0 && s <= 0.5))
    throw config_error("budget_schedule: s must lie in (0, 0.5]");
  if (lambda1 < 1 || lambda2 < 1)
    throw config_error("budget_schedule: population sizes must be positive");
  const double denom = detail::kScheduleRounds * (lambda1 + 2.0 * s * lambda2);
  const double t_raw = std::sqrt(static_cast<double>(total_fes) / denom);
  const long t = static_cast<long>(detail::floor_share(t_raw));
  if (t < 1)
    throw config_error("budget_schedule: budget too small for a single iteration");
  const double v = static_cast<double>(total_fes) / static_cast<double>(t);
  BudgetSchedule sched;
  sched.iterations = static_cast<int>(t);
  sched.per_iteration = total_fes / static_cast<std::uint64_t>(t);
  sched.inner_fes = static_cast<std::uint64_t>(detail::floor_share((1.0 - s) * v));
  sched.outer_fes = static_cast<std::uint64_t>(detail::floor_share(s * v));
  return sched;
}

inline BudgetSchedule budget_schedule(std::uint64_t total_fes, double s, int n_x,
                                      int n_y) {
  return budget_schedule_for_lambdas(total_fes, s, default_population_size(n_y),
                                     default_population_size(n_x));
}

// ---------------------------------------------------------------------------
// Powell momentum check: restart when successive displacements stop making
// an acute angle.

inline bool powell_restart_check(const Vector& x_t, const Vector& x_prev,
                                 const Vector& x_prev2) {
  return (x_t - x_prev).dot(x_prev - x_prev2) <= 0.0;
}

// ---------------------------------------------------------------------------
// Driver

struct RecklessConfig {
  std::uint64_t total_fes = 100000;
  double s = 0.5;
  RecklessVariant variant;
  std::uint64_t seed = 0;

  double nes_eta = 1e-4;
  double nes_sigma_scale = 0.25;
  double cma_sigma_scale = 0.25;
  RestartPolicy inner_policy;

  // Optional fixed starting pair (defaults to a uniform draw).
  std::optional<Vector> initial_x;
  std::optional<Vector> initial_y;
};

struct RecklessIterate {
  Vector x;              // x_t, after the descent step (and possible restart)
  Vector y;              // y_t, the approximate inner maximizer
  double inner_value = 0.0;  // L(x_{t-1}, y_t)
  std::uint64_t budget_used = 0;
};

struct RecklessTrajectory {
  std::vector<RecklessIterate> iterates;
  std::vector<int> restart_iterations;  // 1-based t at which a re-draw fired
  RunTrace trace;

  const SolutionRecord& best() const { return trace.best(); }
};

namespace detail {

// One outer descent step: a fresh ES run centered at x_start minimizing
// x -> L(x, y_fixed) with `units` evaluations; returns the engine's final
// mean. A trailing partial generation only burns the remaining allowance.
inline Vector outer_descent_step(const MinimaxProblem& p, const Vector& y_fixed,
                                 const Vector& x_start, std::uint64_t units,
                                 const RecklessConfig& cfg, BudgetCounter& budget,
                                 Rng& rng) {
  auto value_of = [&](const Vector& xv) {
    try {
      return evaluate(p, xv, y_fixed, budget);
    } catch (const numeric_domain_error&) {
      return kPenaltyFitness;
    }
  };
  int lambda = default_population_size(p.n_x);
  if (cfg.variant.antithetic && lambda % 2 != 0) ++lambda;

  if (cfg.variant.engine == OuterEngine::cma) {
    CmaState state = make_cma_state(x_start, p.x_bounds,
                                    cfg.cma_sigma_scale * mean_width(p.x_bounds),
                                    lambda, cfg.variant.antithetic);
    std::uint64_t spent = 0;
    while (spent < units) {
      const int count = static_cast<int>(std::min<std::uint64_t>(lambda, units - spent));
      auto points = cma_ask_count(state, rng, count);
      std::vector<double> fits(points.size());
      for (std::size_t i = 0; i < points.size(); ++i) fits[i] = value_of(points[i]);
      spent += static_cast<std::uint64_t>(count);
      if (count == lambda)
        state = cma_tell(std::move(state), points, fits, OptMode::minimize);
    }
    return state.mean;
  }

  NesState state = make_nes_state(x_start, p.x_bounds, lambda, cfg.variant.antithetic,
                                  cfg.nes_eta, cfg.nes_sigma_scale);
  std::uint64_t spent = 0;
  while (spent < units) {
    const int count = static_cast<int>(std::min<std::uint64_t>(lambda, units - spent));
    const bool full = count == lambda;
    auto eps = full ? sample_perturbations(rng, lambda, p.n_x, cfg.variant.antithetic)
                    : [&] {
                        std::vector<Vector> e;
                        for (int i = 0; i < count; ++i)
                          e.push_back(rng.gaussian_vector(p.n_x));
                        return e;
                      }();
    std::vector<double> fits(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i)
      fits[i] = -value_of(project(p.x_bounds, state.mu + state.sigma * eps[i]));
    spent += static_cast<std::uint64_t>(count);
    if (full) state = nes_step(std::move(state), standardize_fitness(fits), eps);
  }
  return state.mu;
}

}  // namespace detail

// Runs the full alternation. Consumes exactly cfg.total_fes evaluations
// (the final iteration's inner run absorbs schedule rounding slack); an
// externally raised budget_exhausted yields a valid truncated trajectory.
inline RecklessTrajectory run_reckless(const MinimaxProblem& p,
                                       const RecklessConfig& cfg) {
  const int lambda1 = default_population_size(p.n_y);
  const int lambda2 = default_population_size(p.n_x);
  const auto sched =
      budget_schedule_for_lambdas(cfg.total_fes, cfg.s, lambda1, lambda2);

  BudgetCounter budget(cfg.total_fes);
  Rng rng(mix_seed(cfg.seed, "reckless"));

  RecklessTrajectory traj;
  traj.trace.problem_id = p.id;
  traj.trace.algorithm_id = "reckless:" + variant_code(cfg.variant);
  traj.trace.seed = cfg.seed;
  traj.trace.budget_cap = cfg.total_fes;

  Vector x_prev = cfg.initial_x ? project(p.x_bounds, *cfg.initial_x)
                                : rng.uniform_in(p.x_bounds);
  Vector y_cur = cfg.initial_y ? project(p.y_bounds, *cfg.initial_y)
                               : rng.uniform_in(p.y_bounds);

  // Displacement history for the momentum check; cleared on every restart
  // so the check never fires at t = 1 or right after a re-draw.
  std::deque<Vector> recent{x_prev};

  try {
    for (int t = 1; t <= sched.iterations; ++t) {
      std::uint64_t inner_units = sched.inner_fes;
      if (t == sched.iterations) {
        const std::uint64_t rest = cfg.total_fes - budget.used();
        inner_units = rest > sched.outer_fes ? rest - sched.outer_fes : rest;
      }

      auto slice = [&](const Vector& yv) {
        try {
          return evaluate(p, x_prev, yv, budget);
        } catch (const numeric_domain_error&) {
          return -kPenaltyFitness;
        }
      };
      const auto inner = maximize_with_restarts(slice, p.y_bounds, inner_units,
                                                cfg.inner_policy, rng);
      if (inner.evals_used == 0) break;  // out of budget before any query
      y_cur = inner.best_point;
      traj.trace.record_if_better(x_prev, y_cur, inner.best_value, budget.used());

      Vector x_next = detail::outer_descent_step(p, y_cur, x_prev, sched.outer_fes,
                                                 cfg, budget, rng);
      traj.iterates.push_back(
          RecklessIterate{x_next, y_cur, inner.best_value, budget.used()});

      recent.push_back(x_next);
      if (recent.size() > 3) recent.pop_front();
      if (cfg.variant.powell_restart && recent.size() == 3 &&
          powell_restart_check(recent[2], recent[1], recent[0])) {
        x_next = rng.uniform_in(p.x_bounds);
        y_cur = rng.uniform_in(p.y_bounds);
        traj.restart_iterations.push_back(t);
        recent.clear();
        recent.push_back(x_next);
      }
      x_prev = x_next;
    }
  } catch (const budget_exhausted&) {
    // graceful stop: the trace up to this point stands
  }
  traj.trace.evals_used = budget.used();
  return traj;
}

}  // namespace minimax
