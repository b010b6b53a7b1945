#pragma once

// Competitive two-population baselines: an alternating variant (minimizers
// evolve first, then maximizers) and a parallel variant (both sides evolve
// within the same cycle). Fitness is assigned through full pairwise
// interaction scans; replacement is elitist (only the worst member can be
// ousted, and only by a better challenger).

#include "minimax/common.hpp"
#include "minimax/problems.hpp"

#include <numeric>

namespace minimax {

enum class Role { minimizer, maximizer };

struct Population {
  std::vector<Vector> members;
  Role role = Role::minimizer;
  Box bounds;

  std::size_t size() const { return members.size(); }
};

inline Population uniform_population(std::size_t count, Role role, const Box& bounds,
                                     Rng& rng) {
  Population p;
  p.role = role;
  p.bounds = bounds;
  p.members.reserve(count);
  for (std::size_t i = 0; i < count; ++i) p.members.push_back(rng.uniform_in(bounds));
  return p;
}

struct CoevConfig {
  int population_size = 10;    // lambda
  double mutation_prob = 0.9;  // per-coordinate perturbation probability
  int tournament_size = 2;     // tau
  int replaced_per_gen = 2;
  double mutation_width_divisor = 10.0;  // sigma_m = coordinate width / divisor
  std::uint64_t seed = 0;

  // Optional pre-seeded initial populations (mainly for tests).
  std::optional<std::vector<Vector>> initial_x;
  std::optional<std::vector<Vector>> initial_y;

  void validate() const {
    if (population_size < 2) throw config_error("CoevConfig: population_size must be >= 2");
    if (tournament_size < 1 || tournament_size > population_size)
      throw config_error("CoevConfig: tournament size must lie in [1, lambda]");
    if (mutation_prob < 0.0 || mutation_prob > 1.0)
      throw config_error("CoevConfig: mutation_prob must lie in [0, 1]");
    if (replaced_per_gen < 1 || replaced_per_gen > population_size)
      throw config_error("CoevConfig: replaced_per_gen must lie in [1, lambda]");
  }
};

// ---------------------------------------------------------------------------
// Variation operators

// Lambda independent tau-ary tournaments. Members may recur across
// tournaments, but the tau contestants within one tournament are distinct,
// so a full-size tournament always crowns the population's best. Ties go to
// the lower index for reproducibility.
inline Population tournament_select(const Population& pop, int tau,
                                    const std::vector<double>& scores, OptMode mode,
                                    Rng& rng) {
  if (scores.size() != pop.size())
    throw dimension_error("tournament_select: one score per member required");
  if (tau < 1 || static_cast<std::size_t>(tau) > pop.size())
    throw config_error("tournament_select: tau must lie in [1, population size]");
  Population out;
  out.role = pop.role;
  out.bounds = pop.bounds;
  out.members.reserve(pop.size());
  std::vector<std::size_t> contestants;
  for (std::size_t k = 0; k < pop.size(); ++k) {
    contestants.clear();
    while (contestants.size() < static_cast<std::size_t>(tau)) {
      const std::size_t pick = rng.index(pop.size());
      if (std::find(contestants.begin(), contestants.end(), pick) == contestants.end())
        contestants.push_back(pick);
    }
    std::size_t winner = contestants.front();
    for (std::size_t r = 1; r < contestants.size(); ++r) {
      const std::size_t challenger = contestants[r];
      const bool better = mode == OptMode::minimize
                              ? scores[challenger] < scores[winner] ||
                                    (scores[challenger] == scores[winner] &&
                                     challenger < winner)
                              : scores[challenger] > scores[winner] ||
                                    (scores[challenger] == scores[winner] &&
                                     challenger < winner);
      if (better) winner = challenger;
    }
    out.members.push_back(pop.members[winner]);
  }
  return out;
}

// Perturbs each coordinate with probability mu_prob by N(0, sigma_m^2),
// sigma_m = width / divisor, then clamps to bounds.
inline Population gaussian_mutate(const Population& pop, double mu_prob, Rng& rng,
                                  double width_divisor = 10.0) {
  if (mu_prob < 0.0 || mu_prob > 1.0)
    throw config_error("gaussian_mutate: probability must lie in [0, 1]");
  Population out = pop;
  for (auto& member : out.members) {
    for (Eigen::Index i = 0; i < member.size(); ++i) {
      const auto& iv = pop.bounds[static_cast<std::size_t>(i)];
      if (rng.uniform() < mu_prob)
        member[i] = iv.clamp(member[i] + rng.gaussian() * iv.width() / width_divisor);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pairwise interaction

// Raised when the budget runs out mid-scan; carries the best pair seen so
// the caller can still finish its trace.
struct partial_scan_error : std::runtime_error {
  Vector best_x, best_y;
  double best_value;
  bool has_best;
  partial_scan_error(Vector x, Vector y, double value, bool valid)
      : std::runtime_error("pairwise scan interrupted by budget exhaustion"),
        best_x(std::move(x)),
        best_y(std::move(y)),
        best_value(value),
        has_best(valid) {}
};

namespace detail {

struct InteractionScan {
  // worst_case[i]   = max_j L(x_i, y_j), with the attaining j (lowest on ties)
  // best_case[j]    = max_i L(x_i, y_j)
  std::vector<double> worst_case;
  std::vector<std::size_t> worst_case_arg;
  std::vector<double> best_case;
};

// Full |X| x |Y| evaluation matrix reduced to per-member scores. Throws
// partial_scan_error on budget exhaustion, carrying the best complete row.
inline InteractionScan scan_interactions(const std::vector<Vector>& xs,
                                         const std::vector<Vector>& ys,
                                         const MinimaxProblem& p,
                                         BudgetCounter& budget) {
  InteractionScan s;
  s.worst_case.assign(xs.size(), -std::numeric_limits<double>::infinity());
  s.worst_case_arg.assign(xs.size(), 0);
  s.best_case.assign(ys.size(), -std::numeric_limits<double>::infinity());
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  bool any_row = false;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double wc = -std::numeric_limits<double>::infinity();
    std::size_t wc_arg = 0;
    for (std::size_t j = 0; j < ys.size(); ++j) {
      double v;
      try {
        try {
          v = evaluate(p, xs[i], ys[j], budget);
        } catch (const numeric_domain_error&) {
          v = kPenaltyFitness;  // undefined point: worst case for the minimizer
        }
      } catch (const budget_exhausted&) {
        if (any_row)
          throw partial_scan_error(xs[best_i], ys[s.worst_case_arg[best_i]], best_val,
                                   true);
        throw partial_scan_error(Vector(), Vector(), 0.0, false);
      }
      if (v > wc) {
        wc = v;
        wc_arg = j;
      }
      if (v > s.best_case[j]) s.best_case[j] = v;
    }
    s.worst_case[i] = wc;
    s.worst_case_arg[i] = wc_arg;
    if (!any_row || wc < best_val) {
      any_row = true;
      best_val = wc;
      best_i = i;
    }
  }
  return s;
}

inline std::vector<std::size_t> sorted_order(const std::vector<double>& scores,
                                             bool ascending) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return ascending ? scores[a] < scores[b] : scores[a] > scores[b];
  });
  return idx;
}

}  // namespace detail

// Worst-case champion of X against Y: for each x its maximum over Y, then
// the x minimizing that maximum. Ties break toward lower indices. Consumes
// |X| * |Y| evaluations.
inline std::tuple<Vector, Vector, double> pairwise_best(const Population& X,
                                                        const Population& Y,
                                                        const MinimaxProblem& p,
                                                        BudgetCounter& budget) {
  if (X.members.empty() || Y.members.empty())
    throw config_error("pairwise_best: populations must be nonempty");
  const auto scan = detail::scan_interactions(X.members, Y.members, p, budget);
  std::size_t best = 0;
  for (std::size_t i = 1; i < scan.worst_case.size(); ++i)
    if (scan.worst_case[i] < scan.worst_case[best]) best = i;
  return {X.members[best], Y.members[scan.worst_case_arg[best]],
          scan.worst_case[best]};
}

// ---------------------------------------------------------------------------
// Runners

struct CoevResult {
  RunTrace trace;
  Population final_minimizers;
  Population final_maximizers;
};

namespace detail {

inline void reorder(std::vector<Vector>& members, const std::vector<std::size_t>& idx) {
  std::vector<Vector> out;
  out.reserve(members.size());
  for (auto i : idx) out.push_back(members[i]);
  members = std::move(out);
}

template <typename T>
inline std::vector<T> reordered(const std::vector<T>& v,
                                const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(v.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

inline CoevResult run_coevolution(const MinimaxProblem& p, const CoevConfig& cfg,
                                  std::uint64_t budget_cap, bool alternating) {
  cfg.validate();
  const std::size_t lambda = static_cast<std::size_t>(cfg.population_size);
  BudgetCounter budget(budget_cap);
  Rng rng(mix_seed(cfg.seed, alternating ? "coeva" : "coevp"));

  CoevResult result;
  result.trace.problem_id = p.id;
  result.trace.algorithm_id = alternating ? "coeva" : "coevp";
  result.trace.seed = cfg.seed;
  result.trace.budget_cap = budget_cap;

  Population X = uniform_population(lambda, Role::minimizer, p.x_bounds, rng);
  Population Y = uniform_population(lambda, Role::maximizer, p.y_bounds, rng);
  if (cfg.initial_x) {
    if (cfg.initial_x->size() != lambda)
      throw config_error("CoevConfig: initial_x must have lambda members");
    for (std::size_t i = 0; i < lambda; ++i)
      X.members[i] = project(p.x_bounds, (*cfg.initial_x)[i]);
  }
  if (cfg.initial_y) {
    if (cfg.initial_y->size() != lambda)
      throw config_error("CoevConfig: initial_y must have lambda members");
    for (std::size_t i = 0; i < lambda; ++i)
      Y.members[i] = project(p.y_bounds, (*cfg.initial_y)[i]);
  }

  const int rpg = cfg.replaced_per_gen;
  try {
    while (true) {
      // Rank both sides by their interaction scores: minimizers ascending by
      // worst case over Y, maximizers descending by best case over X.
      auto scan = scan_interactions(X.members, Y.members, p, budget);
      const auto x_order = sorted_order(scan.worst_case, /*ascending=*/true);
      const auto y_order = sorted_order(scan.best_case, /*ascending=*/false);
      reorder(X.members, x_order);
      reorder(Y.members, y_order);
      auto x_scores = reordered(scan.worst_case, x_order);
      auto x_args = reordered(scan.worst_case_arg, x_order);
      auto y_scores = reordered(scan.best_case, y_order);
      // worst_case_arg indexes the pre-sort Y layout; translate it.
      std::vector<std::size_t> y_pos(lambda);
      for (std::size_t r = 0; r < lambda; ++r) y_pos[y_order[r]] = r;
      for (auto& a : x_args) a = y_pos[a];
      result.trace.record_if_better(X.members[0], Y.members[x_args[0]], x_scores[0],
                                    budget.used());

      // Minimizer side: challengers vs the current maximizer population.
      Population Xc = gaussian_mutate(
          tournament_select(X, cfg.tournament_size, x_scores, OptMode::minimize, rng),
          cfg.mutation_prob, rng, cfg.mutation_width_divisor);
      Population Yc;
      if (!alternating) {
        // Parallel variant: both sides breed before either replacement test.
        Yc = gaussian_mutate(
            tournament_select(Y, cfg.tournament_size, y_scores, OptMode::maximize, rng),
            cfg.mutation_prob, rng, cfg.mutation_width_divisor);
      }

      const auto& x_tests = alternating ? Y.members : Yc.members;
      auto xc_scan = scan_interactions(Xc.members, x_tests, p, budget);
      const auto xc_order = sorted_order(xc_scan.worst_case, /*ascending=*/true);
      for (int k = 0; k < rpg; ++k) {
        const std::size_t slot = lambda - 1 - static_cast<std::size_t>(k);
        const std::size_t cand = xc_order[static_cast<std::size_t>(k)];
        if (xc_scan.worst_case[cand] < x_scores[slot]) {
          X.members[slot] = Xc.members[cand];
          x_scores[slot] = xc_scan.worst_case[cand];
          result.trace.record_if_better(Xc.members[cand],
                                        x_tests[xc_scan.worst_case_arg[cand]],
                                        xc_scan.worst_case[cand], budget.used());
        }
      }

      // Maximizer side.
      if (alternating) {
        Yc = gaussian_mutate(
            tournament_select(Y, cfg.tournament_size, y_scores, OptMode::maximize, rng),
            cfg.mutation_prob, rng, cfg.mutation_width_divisor);
        auto yc_scan = scan_interactions(X.members, Yc.members, p, budget);
        const auto yc_order = sorted_order(yc_scan.best_case, /*ascending=*/false);
        for (int k = 0; k < rpg; ++k) {
          const std::size_t slot = lambda - 1 - static_cast<std::size_t>(k);
          const std::size_t cand = yc_order[static_cast<std::size_t>(k)];
          if (yc_scan.best_case[cand] > y_scores[slot]) {
            Y.members[slot] = Yc.members[cand];
            y_scores[slot] = yc_scan.best_case[cand];
          }
        }
      } else {
        // Parallel variant: the challenger scan Xc x Yc already carries the
        // maximizer-side scores (best case of each candidate y over Xc).
        const auto yc_order = sorted_order(xc_scan.best_case, /*ascending=*/false);
        for (int k = 0; k < rpg; ++k) {
          const std::size_t slot = lambda - 1 - static_cast<std::size_t>(k);
          const std::size_t cand = yc_order[static_cast<std::size_t>(k)];
          if (xc_scan.best_case[cand] > y_scores[slot]) {
            Y.members[slot] = Yc.members[cand];
            y_scores[slot] = xc_scan.best_case[cand];
          }
        }
      }
    }
  } catch (const budget_exhausted&) {
  } catch (const partial_scan_error& e) {
    if (e.has_best)
      result.trace.record_if_better(e.best_x, e.best_y, e.best_value, budget.used());
  }
  result.trace.evals_used = budget.used();
  result.final_minimizers = std::move(X);
  result.final_maximizers = std::move(Y);
  return result;
}

}  // namespace detail

inline CoevResult run_coev_alternating(const MinimaxProblem& p, const CoevConfig& cfg,
                                       std::uint64_t budget_cap) {
  return detail::run_coevolution(p, cfg, budget_cap, /*alternating=*/true);
}

inline CoevResult run_coev_parallel(const MinimaxProblem& p, const CoevConfig& cfg,
                                    std::uint64_t budget_cap) {
  return detail::run_coevolution(p, cfg, budget_cap, /*alternating=*/false);
}

}  // namespace minimax
