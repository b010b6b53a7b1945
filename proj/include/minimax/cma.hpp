#pragma once

// Covariance matrix adaptation ES. The update is the standard combination of
// rank-one / rank-mu covariance adaptation with cumulative step-size control;
// all constants are spelled out below with their defining formulas rather
// than imported from a library. Selection is purely rank-based, so the state
// transition is invariant to strictly monotone fitness transformations.

#include "minimax/common.hpp"

#include <Eigen/Dense>

namespace minimax {

// Default population size lambda = 4 + floor(3 ln n).
inline int default_population_size(int n) {
  if (n < 1) throw config_error("default_population_size: n must be positive");
  return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(n))));
}

struct CmaParams {
  int n = 0;
  int lambda = 0;
  int mu = 0;           // number of selected parents
  Vector weights;       // mu positive recombination weights, sum 1
  double mu_eff = 0.0;  // variance-effective selection mass
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double c_c = 0.0;
  double c_1 = 0.0;
  double c_mu = 0.0;
  double chi_n = 0.0;   // E||N(0,I)||

  static CmaParams defaults(int n, int lambda) {
    if (n < 1) throw config_error("CmaParams: dimension must be positive");
    if (lambda < 2) throw config_error("CmaParams: lambda must be >= 2");
    CmaParams p;
    p.n = n;
    p.lambda = lambda;
    p.mu = lambda / 2;
    p.weights = Vector(p.mu);
    for (int i = 0; i < p.mu; ++i)
      p.weights[i] = std::log((lambda + 1.0) / 2.0) - std::log(i + 1.0);
    p.weights /= p.weights.sum();
    p.mu_eff = 1.0 / p.weights.squaredNorm();
    const double nd = static_cast<double>(n);
    p.c_sigma = (p.mu_eff + 2.0) / (nd + p.mu_eff + 5.0);
    p.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((p.mu_eff - 1.0) / (nd + 1.0)) - 1.0) +
                p.c_sigma;
    p.c_c = (4.0 + p.mu_eff / nd) / (nd + 4.0 + 2.0 * p.mu_eff / nd);
    p.c_1 = 2.0 / ((nd + 1.3) * (nd + 1.3) + p.mu_eff);
    p.c_mu = std::min(1.0 - p.c_1, 2.0 * (p.mu_eff - 2.0 + 1.0 / p.mu_eff) /
                                       ((nd + 2.0) * (nd + 2.0) + p.mu_eff));
    p.chi_n = std::sqrt(nd) * (1.0 - 1.0 / (4.0 * nd) + 1.0 / (21.0 * nd * nd));
    return p;
  }
};

struct CmaState {
  CmaParams params;
  Box bounds;
  Vector mean;
  double step_size = 0.3;
  Eigen::MatrixXd covariance;
  Vector path_sigma;  // step-size evolution path
  Vector path_cov;    // covariance evolution path
  long generation = 0;
  bool antithetic = false;

  // Cached decomposition covariance = basis * diag(scale^2) * basis^T.
  Eigen::MatrixXd eigen_basis;
  Vector eigen_scale;
};

// Refreshes the cached eigendecomposition. Eigenvalues are floored at
// 1e-14 * trace/n so the matrix stays usable under numerical drift.
inline void cma_update_eigensystem(CmaState& s) {
  const int n = s.params.n;
  s.covariance = 0.5 * (s.covariance + s.covariance.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s.covariance);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("cma_update_eigensystem: eigendecomposition failed");
  Vector evals = solver.eigenvalues();
  const double floor_value =
      1e-14 * std::max(s.covariance.trace() / static_cast<double>(n), 1e-300);
  bool repaired = false;
  for (int i = 0; i < n; ++i)
    if (!(evals[i] > floor_value)) {
      evals[i] = floor_value;
      repaired = true;
    }
  if (repaired) {
    s.covariance = solver.eigenvectors() * evals.asDiagonal() *
                   solver.eigenvectors().transpose();
  }
  s.eigen_basis = solver.eigenvectors();
  s.eigen_scale = evals.cwiseSqrt();
}

inline CmaState make_cma_state(Vector mean0, const Box& bounds, double step_size,
                               int lambda = 0, bool antithetic = false) {
  const int n = static_cast<int>(mean0.size());
  if (static_cast<std::size_t>(n) != bounds.size())
    throw dimension_error("make_cma_state: mean/bounds dimension mismatch");
  if (!(step_size > 0.0)) throw config_error("make_cma_state: step size must be positive");
  if (lambda == 0) lambda = default_population_size(n);
  if (antithetic && lambda % 2 != 0) ++lambda;  // mirrored pairs need an even population
  CmaState s;
  s.params = CmaParams::defaults(n, lambda);
  s.bounds = bounds;
  s.mean = project(bounds, std::move(mean0));
  s.step_size = step_size;
  s.covariance = Eigen::MatrixXd::Identity(n, n);
  s.path_sigma = Vector::Zero(n);
  s.path_cov = Vector::Zero(n);
  s.antithetic = antithetic;
  cma_update_eigensystem(s);
  return s;
}

// Samples `count` points from N(mean, step_size^2 C), projected onto the
// bounds. Mirroring (if enabled) is applied before projection.
inline std::vector<Vector> cma_ask_count(const CmaState& s, Rng& rng, int count) {
  if (count < 1) throw config_error("cma_ask_count: count must be positive");
  const int n = s.params.n;
  std::vector<Vector> points;
  points.reserve(static_cast<std::size_t>(count));
  Vector step(n);
  while (static_cast<int>(points.size()) < count) {
    const Vector z = rng.gaussian_vector(n);
    step.noalias() = s.eigen_basis * (s.eigen_scale.asDiagonal() * z);
    points.push_back(project(s.bounds, s.mean + s.step_size * step));
    if (s.antithetic && static_cast<int>(points.size()) < count)
      points.push_back(project(s.bounds, s.mean - s.step_size * step));
  }
  return points;
}

inline std::vector<Vector> cma_ask(const CmaState& s, Rng& rng) {
  return cma_ask_count(s, rng, s.params.lambda);
}

namespace detail {

// Ranks `fitnesses` for the given mode: ascending keys, stable tie-break by
// lower index. Maximization sorts by negated fitness, so maximize(f) and
// minimize(-f) produce bit-identical orderings.
inline std::vector<std::size_t> selection_order(const std::vector<double>& fitnesses,
                                                OptMode mode) {
  std::vector<std::size_t> idx(fitnesses.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const double sign = mode == OptMode::minimize ? 1.0 : -1.0;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return sign * fitnesses[a] < sign * fitnesses[b];
  });
  return idx;
}

}  // namespace detail

// One generation update from an evaluated population.
inline CmaState cma_tell(CmaState s, const std::vector<Vector>& points,
                         const std::vector<double>& fitnesses, OptMode mode) {
  const auto& par = s.params;
  if (points.size() != fitnesses.size() ||
      points.size() != static_cast<std::size_t>(par.lambda))
    throw dimension_error("cma_tell: population size must equal lambda");

  const auto order = detail::selection_order(fitnesses, mode);
  const Vector mean_old = s.mean;

  Vector mean_new = Vector::Zero(par.n);
  for (int i = 0; i < par.mu; ++i) mean_new += par.weights[i] * points[order[i]];
  s.mean = project(s.bounds, mean_new);
  s.generation += 1;

  const Vector y_w = (s.mean - mean_old) / s.step_size;

  // C^{-1/2} y_w through the cached decomposition.
  Vector c_inv_sqrt_y =
      s.eigen_basis *
      (s.eigen_basis.transpose() * y_w).cwiseQuotient(s.eigen_scale).eval();

  s.path_sigma = (1.0 - par.c_sigma) * s.path_sigma +
                 std::sqrt(par.c_sigma * (2.0 - par.c_sigma) * par.mu_eff) * c_inv_sqrt_y;

  const double ps_norm = s.path_sigma.norm();
  const double expected = std::sqrt(
      1.0 - std::pow(1.0 - par.c_sigma, 2.0 * static_cast<double>(s.generation)));
  const bool h_sigma =
      ps_norm / expected / par.chi_n < 1.4 + 2.0 / (par.n + 1.0);

  s.path_cov = (1.0 - par.c_c) * s.path_cov +
               (h_sigma ? std::sqrt(par.c_c * (2.0 - par.c_c) * par.mu_eff) : 0.0) * y_w;

  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(par.n, par.n);
  for (int i = 0; i < par.mu; ++i) {
    const Vector yi = (points[order[i]] - mean_old) / s.step_size;
    rank_mu.noalias() += par.weights[i] * yi * yi.transpose();
  }
  const double delta_h = (1.0 - (h_sigma ? 1.0 : 0.0)) * par.c_c * (2.0 - par.c_c);
  s.covariance = (1.0 - par.c_1 - par.c_mu) * s.covariance +
                 par.c_1 * (s.path_cov * s.path_cov.transpose() + delta_h * s.covariance) +
                 par.c_mu * rank_mu;

  s.step_size *= std::exp((par.c_sigma / par.d_sigma) * (ps_norm / par.chi_n - 1.0));
  if (!std::isfinite(s.step_size) || s.step_size <= 0.0)
    s.step_size = 1e-12;  // degenerate run; the restart wrapper will reset it

  cma_update_eigensystem(s);
  return s;
}

// ---------------------------------------------------------------------------
// Restarted inner maximization

struct RestartPolicy {
  // Unlimited restarts within budget unless configured otherwise.
  std::size_t max_restarts = std::numeric_limits<std::size_t>::max();
  double stagnation_tolerance = 1e-9;
  int stagnation_window = 0;  // 0: use 10 + ceil(30 n / lambda)
};

inline int default_stagnation_window(int n, int lambda) {
  return 10 + (30 * n + lambda - 1) / lambda;
}

struct MaximizeResult {
  Vector best_point;
  double best_value = -std::numeric_limits<double>::infinity();
  std::uint64_t evals_used = 0;
  std::size_t restarts = 0;
};

// Maximizes `objective` over the box with CMA-ES, re-initializing uniformly
// whenever the best value stalls. Consumes at most `budget_units`
// evaluations; a final short generation is truncated so the allowance is
// used exactly. Returns the best point seen across all restarts. A thrown
// budget_exhausted (from an externally metered objective) stops the search
// early and the best-so-far is still returned.
inline MaximizeResult maximize_with_restarts(
    const std::function<double(const Vector&)>& objective, const Box& bounds,
    std::uint64_t budget_units, const RestartPolicy& policy, Rng& rng,
    std::optional<Vector> initial_mean = std::nullopt,
    double sigma_scale = 0.25) {
  const int n = static_cast<int>(bounds.size());
  const int lambda = default_population_size(n);
  const int window = policy.stagnation_window > 0
                         ? policy.stagnation_window
                         : default_stagnation_window(n, lambda);
  MaximizeResult result;
  result.best_point = Vector::Zero(n);

  auto value_of = [&](const Vector& v) {
    try {
      return objective(v);
    } catch (const numeric_domain_error&) {
      return -kPenaltyFitness;
    }
  };

  const double sigma0 = sigma_scale * mean_width(bounds);
  bool have_point = false;
  try {
    CmaState state = make_cma_state(
        initial_mean ? *initial_mean : rng.uniform_in(bounds), bounds, sigma0);
    double run_best = -std::numeric_limits<double>::infinity();
    long last_improvement_gen = 0;

    while (result.evals_used < budget_units) {
      const int count = static_cast<int>(
          std::min<std::uint64_t>(lambda, budget_units - result.evals_used));
      auto points = cma_ask_count(state, rng, count);
      std::vector<double> fits(points.size());
      for (std::size_t i = 0; i < points.size(); ++i) {
        fits[i] = value_of(points[i]);
        ++result.evals_used;
        if (fits[i] > result.best_value || !have_point) {
          have_point = true;
          result.best_value = fits[i];
          result.best_point = points[i];
        }
        if (fits[i] > run_best + policy.stagnation_tolerance) {
          run_best = fits[i];
          last_improvement_gen = state.generation;
        }
      }
      if (count < lambda) break;  // truncated tail generation, no update possible
      state = cma_tell(std::move(state), points, fits, OptMode::maximize);

      const bool degenerate = !state.mean.allFinite();
      if (degenerate || state.generation - last_improvement_gen >= window) {
        if (result.restarts >= policy.max_restarts) break;  // early stop per policy
        ++result.restarts;
        state = make_cma_state(rng.uniform_in(bounds), bounds, sigma0);
        run_best = -std::numeric_limits<double>::infinity();
        last_improvement_gen = 0;
      }
    }
  } catch (const budget_exhausted&) {
    // external cap reached mid-search; report what was found
  }
  return result;
}

}  // namespace minimax
