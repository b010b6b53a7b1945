#pragma once

// Differential-evolution minimax baseline: a DE/rand/1/bin loop over the
// outer population whose worst-case fitness is maintained lazily through a
// min-heap. Only the cheapest-looking candidates get their worst-case
// estimate refined ("bottom boosting"); an estimate is trusted once the
// candidate has absorbed a fixed refinement allowance.
//
// NOTE: this is a reconstruction from the algorithm's published description,
// not a replication of the original authors' implementation.

#include "minimax/cma.hpp"
#include "minimax/common.hpp"
#include "minimax/problems.hpp"

namespace minimax {

struct MmdeConfig {
  int population_size = 100;
  double differential_weight = 0.7;  // F
  double crossover_prob = 0.5;       // CR
  int trust_evals = 190;             // refinement spend before an estimate is trusted
  int burst_evals = 0;               // per refinement burst; 0: two inner generations
  std::uint64_t seed = 0;

  void validate() const {
    if (population_size < 4)
      throw config_error("MmdeConfig: DE needs a population of at least 4");
    if (crossover_prob < 0.0 || crossover_prob > 1.0)
      throw config_error("MmdeConfig: crossover_prob must lie in [0, 1]");
    if (trust_evals < 1) throw config_error("MmdeConfig: trust_evals must be >= 1");
  }
};

// ---------------------------------------------------------------------------
// DE variation: rand/1/bin

// One trial vector per member: base + F (a - b) with binomial crossover at
// rate CR (the j-rand coordinate always crosses), clamped to bounds.
inline std::vector<Vector> de_variation(const std::vector<Vector>& pop, double F,
                                        double CR, const Box& bounds, Rng& rng) {
  if (pop.size() < 4)
    throw config_error("de_variation: population must have at least 4 members");
  const std::size_t n = static_cast<std::size_t>(pop.front().size());
  std::vector<Vector> trials;
  trials.reserve(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    std::size_t r1, r2, r3;
    do r1 = rng.index(pop.size());
    while (r1 == i);
    do r2 = rng.index(pop.size());
    while (r2 == i || r2 == r1);
    do r3 = rng.index(pop.size());
    while (r3 == i || r3 == r1 || r3 == r2);
    const Vector mutant = pop[r1] + F * (pop[r2] - pop[r3]);
    const std::size_t j_rand = rng.index(n);
    Vector trial = pop[i];
    for (std::size_t j = 0; j < n; ++j)
      if (j == j_rand || rng.uniform() < CR)
        trial[static_cast<Eigen::Index>(j)] = mutant[static_cast<Eigen::Index>(j)];
    trials.push_back(project(bounds, std::move(trial)));
  }
  return trials;
}

// ---------------------------------------------------------------------------
// Candidate heap

struct HeapEntry {
  Vector x;
  Vector y_worst;                    // argmax of the estimate so far
  double worst_case_estimate = 0.0;  // max over all y queried for this x
  std::uint64_t refinement_evals = 0;
  double refine_scale = 0.25;  // burst search scale, annealed per burst
};

// Min-heap on the worst-case estimate. Backed by a plain vector so the heap
// property can be asserted in O(n).
class CandidateHeap {
 public:
  static bool after(const HeapEntry& a, const HeapEntry& b) {
    return a.worst_case_estimate > b.worst_case_estimate;
  }

  void push(HeapEntry e) {
    heap_.push_back(std::move(e));
    std::push_heap(heap_.begin(), heap_.end(), after);
  }

  HeapEntry pop_min() {
    if (heap_.empty()) throw std::logic_error("CandidateHeap: empty");
    std::pop_heap(heap_.begin(), heap_.end(), after);
    HeapEntry e = std::move(heap_.back());
    heap_.pop_back();
    return e;
  }

  const HeapEntry& min() const {
    if (heap_.empty()) throw std::logic_error("CandidateHeap: empty");
    return heap_.front();
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  const std::vector<HeapEntry>& entries() const { return heap_; }

  bool is_heap() const { return std::is_heap(heap_.begin(), heap_.end(), after); }

 private:
  std::vector<HeapEntry> heap_;
};

namespace detail {

// One refinement burst: a short restarted-CMA maximization of y -> L(x, y).
// Most bursts polish around the entry's current worst y with an annealed
// search scale; every fourth burst probes from a fresh uniform start at
// full scale so multimodal slices cannot hide a distant peak forever.
// Estimates can only grow (max over a larger set of probes).
inline void refine_entry(HeapEntry& e, const MinimaxProblem& p, BudgetCounter& budget,
                         std::uint64_t burst, Rng& rng) {
  if (burst == 0) return;
  auto slice = [&](const Vector& yv) {
    try {
      return evaluate(p, e.x, yv, budget);
    } catch (const numeric_domain_error&) {
      return -kPenaltyFitness;
    }
  };
  RestartPolicy policy;
  const bool global_probe = (e.refinement_evals / std::max<std::uint64_t>(burst, 1)) % 4 == 3;
  const auto r = global_probe
                     ? maximize_with_restarts(slice, p.y_bounds, burst, policy, rng)
                     : maximize_with_restarts(slice, p.y_bounds, burst, policy, rng,
                                              e.y_worst, e.refine_scale);
  e.refinement_evals += r.evals_used;
  if (!global_probe) e.refine_scale = std::max(0.02, 0.5 * e.refine_scale);
  if (r.evals_used > 0 && r.best_value > e.worst_case_estimate) {
    e.worst_case_estimate = r.best_value;
    e.y_worst = r.best_point;
  }
}

inline std::uint64_t default_burst(const MinimaxProblem& p) {
  return 2 * static_cast<std::uint64_t>(default_population_size(p.n_y));
}

}  // namespace detail

// Repeatedly pops the minimum-estimate entry and refines it until the heap
// bottom has spent `trust_evals` refinement evaluations and can be accepted
// as incumbent. The trusted bottom still receives one audit burst per call,
// so a stale underestimate cannot sit at the bottom across generations
// without being re-examined. Returns true when the bottom entry is trusted;
// false when the budget ran out first (heap left valid either way).
inline bool bottom_boost_refine(CandidateHeap& heap, const MinimaxProblem& p,
                                BudgetCounter& budget, std::uint64_t per_candidate_evals,
                                std::uint64_t trust_evals, Rng& rng) {
  if (heap.empty()) throw config_error("bottom_boost_refine: empty heap");
  bool audited = false;
  while (true) {
    const bool bottom_trusted = heap.min().refinement_evals >= trust_evals;
    if (bottom_trusted && audited) return true;
    HeapEntry e = heap.pop_min();
    const std::uint64_t burst =
        bottom_trusted ? per_candidate_evals
                       : std::min(per_candidate_evals,
                                  trust_evals - e.refinement_evals);
    if (bottom_trusted) audited = true;
    bool out_of_budget = false;
    try {
      detail::refine_entry(e, p, budget, burst, rng);
    } catch (const budget_exhausted&) {
      out_of_budget = true;
    }
    heap.push(std::move(e));
    if (out_of_budget || budget.remaining() == 0)
      return heap.min().refinement_evals >= trust_evals;
  }
}

// ---------------------------------------------------------------------------
// Runner

inline RunTrace run_mmde(const MinimaxProblem& p, const MmdeConfig& cfg,
                         std::uint64_t budget_cap) {
  cfg.validate();
  BudgetCounter budget(budget_cap);
  Rng rng(mix_seed(cfg.seed, "mmde"));

  RunTrace trace;
  trace.problem_id = p.id;
  trace.algorithm_id = "mmde";
  trace.seed = cfg.seed;
  trace.budget_cap = budget_cap;

  const std::uint64_t burst =
      cfg.burst_evals > 0 ? static_cast<std::uint64_t>(cfg.burst_evals)
                          : detail::default_burst(p);
  const auto trust = static_cast<std::uint64_t>(cfg.trust_evals);
  const std::size_t np = static_cast<std::size_t>(cfg.population_size);

  // Dangerous y's discovered by any candidate's refinement. Slices vary
  // smoothly in x, so a y that exposed one candidate usually exposes its
  // neighbors too; probing the archive keeps the population from converging
  // onto blind spots of the per-candidate refinement.
  std::vector<Vector> danger_archive;
  auto remember_danger = [&](const Vector& y) {
    for (const auto& a : danger_archive)
      if ((a - y).norm() < 1e-9) return;
    danger_archive.push_back(y);
    if (danger_archive.size() > 10) danger_archive.erase(danger_archive.begin());
  };
  auto probe_archive = [&](HeapEntry& e, double stop_at) {
    for (const auto& y : danger_archive) {
      if (e.worst_case_estimate >= stop_at) return;
      double v;
      try {
        v = evaluate(p, e.x, y, budget);
      } catch (const numeric_domain_error&) {
        v = kPenaltyFitness;
      }
      e.refinement_evals += 1;
      if (v > e.worst_case_estimate) {
        e.worst_case_estimate = v;
        e.y_worst = y;
      }
    }
  };

  CandidateHeap heap;
  try {
    for (std::size_t i = 0; i < np; ++i) {
      HeapEntry e;
      e.x = rng.uniform_in(p.x_bounds);
      e.y_worst = rng.uniform_in(p.y_bounds);
      e.worst_case_estimate = evaluate(p, e.x, e.y_worst, budget);
      e.refinement_evals = 1;
      heap.push(std::move(e));
    }

    while (true) {
      // Trust the bottom of the heap, then record it as the incumbent. A
      // would-be record is audited with a few extra bursts first: estimates
      // are lower bounds, and taking a running minimum over raw lower
      // bounds would lock in whichever was most optimistic.
      if (!bottom_boost_refine(heap, p, budget, burst, trust, rng)) break;
      {
        HeapEntry e = heap.pop_min();
        const double to_beat = trace.best_records.empty()
                                   ? std::numeric_limits<double>::infinity()
                                   : trace.best_records.back().value;
        probe_archive(e, to_beat);
        for (int audit = 0; audit < 4 && e.worst_case_estimate < to_beat; ++audit) {
          const double before = e.worst_case_estimate;
          detail::refine_entry(e, p, budget, burst, rng);
          if (e.worst_case_estimate > before) remember_danger(e.y_worst);
          if (budget.remaining() == 0) {
            heap.push(std::move(e));
            throw budget_exhausted();
          }
        }
        if (e.worst_case_estimate < to_beat)
          trace.record_if_better(e.x, e.y_worst, e.worst_case_estimate, budget.used());
        heap.push(std::move(e));
      }

      // DE generation over the x-population (heap storage order).
      std::vector<Vector> xs;
      xs.reserve(heap.size());
      for (const auto& e : heap.entries()) xs.push_back(e.x);
      auto trials = de_variation(xs, cfg.differential_weight, cfg.crossover_prob,
                                 p.x_bounds, rng);

      CandidateHeap next;
      for (std::size_t i = 0; i < heap.entries().size(); ++i) {
        const HeapEntry& target = heap.entries()[i];
        HeapEntry challenger;
        challenger.x = trials[i];
        challenger.y_worst = target.y_worst;
        // First probe at the target's known-dangerous y and the shared
        // danger archive: a trial whose value there already exceeds the
        // target's estimate cannot beat it (its own worst case only grows),
        // so the expensive refinement is skipped.
        challenger.worst_case_estimate = evaluate(p, challenger.x, challenger.y_worst, budget);
        challenger.refinement_evals = 1;
        probe_archive(challenger, target.worst_case_estimate);
        bool replace = false;
        if (challenger.worst_case_estimate < target.worst_case_estimate) {
          while (challenger.refinement_evals < trust &&
                 challenger.worst_case_estimate < target.worst_case_estimate) {
            const std::uint64_t step =
                std::min(burst, trust - challenger.refinement_evals);
            const double before = challenger.worst_case_estimate;
            detail::refine_entry(challenger, p, budget, step, rng);
            if (challenger.worst_case_estimate > before)
              remember_danger(challenger.y_worst);
            if (budget.remaining() == 0) throw budget_exhausted();
          }
          replace = challenger.worst_case_estimate < target.worst_case_estimate;
        }
        next.push(replace ? std::move(challenger) : target);
      }
      heap = std::move(next);
    }
  } catch (const budget_exhausted&) {
    // cap reached; trace stands as-is
  }

  // A run too short to trust any candidate still reports its best guess.
  if (trace.best_records.empty() && !heap.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < heap.entries().size(); ++i)
      if (heap.entries()[i].worst_case_estimate <
          heap.entries()[best].worst_case_estimate)
        best = i;
    const auto& e = heap.entries()[best];
    trace.record_if_better(e.x, e.y_worst, e.worst_case_estimate, budget.used());
  }
  trace.evals_used = budget.used();
  return trace;
}

}  // namespace minimax
