#pragma once

// Simplified natural-evolution-strategy machinery: isotropic Gaussian
// perturbation sampling (optionally mirrored), batch fitness
// standardization, the fixed-variance NES mean update, and the Monte Carlo
// descent-direction estimate taken at an inner maximizer.

#include "minimax/common.hpp"
#include "minimax/problems.hpp"

namespace minimax {

// Draws lambda standard-normal n-vectors. With `antithetic` they come in
// adjacent mirrored pairs (e, -e), which cancels the value and curvature
// terms of the update estimator.
inline std::vector<Vector> sample_perturbations(Rng& rng, int lambda, int n,
                                                bool antithetic) {
  if (lambda < 2) throw config_error("sample_perturbations: lambda must be >= 2");
  if (antithetic && lambda % 2 != 0)
    throw config_error("sample_perturbations: antithetic sampling needs even lambda");
  std::vector<Vector> eps;
  eps.reserve(static_cast<std::size_t>(lambda));
  if (antithetic) {
    for (int i = 0; i < lambda / 2; ++i) {
      Vector e = rng.gaussian_vector(n);
      eps.push_back(e);
      eps.push_back(-e);
    }
  } else {
    for (int i = 0; i < lambda; ++i) eps.push_back(rng.gaussian_vector(n));
  }
  return eps;
}

// Shifts/scales a fitness batch to mean 0, std 1 (population convention).
// A zero-variance batch carries no ranking information and maps to all
// zeros, which turns the subsequent NES step into a no-op.
inline std::vector<double> standardize_fitness(const std::vector<double>& f) {
  if (f.empty()) throw dimension_error("standardize_fitness: empty batch");
  const double n = static_cast<double>(f.size());
  double mean = 0.0;
  for (double v : f) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : f) var += (v - mean) * (v - mean);
  var /= n;
  const double sd = std::sqrt(var);
  std::vector<double> out(f.size(), 0.0);
  if (sd > 0.0)
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = (f[i] - mean) / sd;
  return out;
}

// ---------------------------------------------------------------------------
// NES state

struct NesState {
  Vector mu;            // distribution mean
  double sigma = 0.25;  // fixed perturbation std
  double eta = 1e-4;    // learning rate
  int lambda = 2;
  bool antithetic = false;
  Box bounds;           // mean is projected here after every step
};

inline NesState make_nes_state(Vector mu0, const Box& bounds, int lambda,
                               bool antithetic, double eta = 1e-4,
                               double sigma_scale = 0.25) {
  if (lambda < 2) throw config_error("NesState: lambda must be >= 2");
  if (antithetic && lambda % 2 != 0)
    throw config_error("NesState: antithetic sampling needs even lambda");
  NesState s;
  s.bounds = bounds;
  s.mu = project(bounds, std::move(mu0));
  s.sigma = sigma_scale * mean_width(bounds);
  s.eta = eta;
  s.lambda = lambda;
  s.antithetic = antithetic;
  return s;
}

// One gradient-ascent step on the expected fitness:
//   mu <- mu + eta * (1 / (lambda sigma)) * sum_i f_i eps_i
// Fitnesses must already be standardized by the caller. Sigma and eta are
// left untouched; the new mean is projected onto the bounds.
inline NesState nes_step(NesState s, const std::vector<double>& fitnesses,
                         const std::vector<Vector>& perturbations) {
  if (fitnesses.size() != perturbations.size() ||
      fitnesses.size() != static_cast<std::size_t>(s.lambda))
    throw dimension_error("nes_step: batch size must equal lambda");
  Vector g = Vector::Zero(s.mu.size());
  for (std::size_t i = 0; i < fitnesses.size(); ++i) {
    if (perturbations[i].size() != s.mu.size())
      throw dimension_error("nes_step: perturbation dimension mismatch");
    g += fitnesses[i] * perturbations[i];
  }
  g /= static_cast<double>(s.lambda) * s.sigma;
  s.mu = project(s.bounds, s.mu + s.eta * g);
  return s;
}

// ---------------------------------------------------------------------------
// Monte Carlo descent direction
//
//   -(1 / (sigma lambda)) * sum_i L(x + sigma eps_i, y*) eps_i
//
// evaluated with mirrored perturbation pairs by default: the pairing removes
// the O(L(x)/sigma) baseline noise, so the estimate aligns with -grad_x L
// already at moderate lambda. Consumes exactly lambda budget units.

inline Vector descent_direction(const std::function<double(const Vector&)>& L_at,
                                const Vector& x, double sigma, int lambda, Rng& rng,
                                bool antithetic = true) {
  if (lambda < 2) throw config_error("descent_direction: lambda must be >= 2");
  if (!(sigma > 0.0)) throw config_error("descent_direction: sigma must be positive");
  if (antithetic && lambda % 2 != 0)
    throw config_error("descent_direction: antithetic sampling needs even lambda");
  const int n = static_cast<int>(x.size());
  auto eps = sample_perturbations(rng, lambda, n, antithetic);
  Vector acc = Vector::Zero(n);
  for (const auto& e : eps) acc += L_at(x + sigma * e) * e;
  return -acc / (sigma * static_cast<double>(lambda));
}

// Metered overload: perturbed points are projected onto the problem's
// x-bounds before evaluation.
inline Vector descent_direction(const MinimaxProblem& p, const Vector& x,
                                const Vector& y_star, double sigma, int lambda,
                                BudgetCounter& budget, Rng& rng,
                                bool antithetic = true) {
  auto slice = [&](const Vector& xv) {
    return evaluate(p, project(p.x_bounds, xv), y_star, budget);
  };
  return descent_direction(slice, x, sigma, lambda, rng, antithetic);
}

}  // namespace minimax
