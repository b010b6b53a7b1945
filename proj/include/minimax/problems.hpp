#pragma once

// Minimax problem definitions: the six-function benchmark suite (L1, L2
// scalable), the digital filter design application, the MSE metric, and a
// string-addressable registry with a JSON manifest.

#include "minimax/common.hpp"

#include <json.hpp>

#include <array>
#include <functional>
#include <sstream>

namespace minimax {

// Known solution of a problem. `y` empty means any feasible y attains the
// optimum; `x` empty means only the optimal value is known.
struct KnownOptimum {
  std::optional<Vector> x;
  std::optional<Vector> y;
  double value = 0.0;
};

struct MinimaxProblem {
  std::string id;
  int n_x = 0;
  int n_y = 0;
  Box x_bounds;
  Box y_bounds;
  std::function<double(const Vector&, const Vector&)> evaluator;  // pure, deterministic
  std::optional<KnownOptimum> optimum;
};

// Metered oracle query. Charges exactly one budget unit per call.
inline double evaluate(const MinimaxProblem& p, const Vector& x, const Vector& y,
                       BudgetCounter& budget) {
  if (x.size() != p.n_x || y.size() != p.n_y)
    throw dimension_error("evaluate: argument dimensions do not match problem");
  if (!in_box(p.x_bounds, x) || !in_box(p.y_bounds, y))
    throw domain_error("evaluate: point outside problem domain");
  budget.charge();
  return p.evaluator(x, y);
}

inline std::optional<double> saddle_value(const MinimaxProblem& p) {
  if (!p.optimum) return std::nullopt;
  return p.optimum->value;
}

// Mean square Euclidean error of a solution against the known optimizer.
inline double mse(const Vector& x, const Vector& x_star) {
  if (x.size() == 0 || x.size() != x_star.size())
    throw dimension_error("mse: vectors must be nonempty and equally sized");
  return (x - x_star).squaredNorm() / static_cast<double>(x.size());
}

// ---------------------------------------------------------------------------
// Digital filter design
//
// A cascade of K = 2 biquad sections whose amplitude response should track
// the target S(psi) = |1 - 2 psi| over the normalized frequency psi in [0,1]
// with theta = pi * psi.

struct FilterParams {
  double gain = 1.0;                    // A
  std::array<double, 2> a{0.0, 0.0};
  std::array<double, 2> b{0.0, 0.0};
  std::array<double, 2> c{0.0, 0.0};
  std::array<double, 2> d{0.0, 0.0};

  // Layout: [A, a1, a2, b1, b2, c1, c2, d1, d2]
  static FilterParams from_vector(const Vector& x) {
    if (x.size() != 9) throw dimension_error("FilterParams: expected 9 coefficients");
    FilterParams p;
    p.gain = x[0];
    p.a = {x[1], x[2]};
    p.b = {x[3], x[4]};
    p.c = {x[5], x[6]};
    p.d = {x[7], x[8]};
    return p;
  }

  Vector to_vector() const {
    Vector x(9);
    x << gain, a[0], a[1], b[0], b[1], c[0], c[1], d[0], d[1];
    return x;
  }
};

// Amplitude |H| of the cascade at angular frequency theta in [0, pi].
// Throws numeric_domain_error when a section magnitude is not representable
// (a pole on the unit circle makes a denominator vanish); optimizers treat
// such points as infinitely bad for whoever is optimizing.
inline double filter_amplitude(const FilterParams& p, double theta) {
  const double ct = std::cos(theta);
  const double c2t = 2.0 * ct * ct - 1.0;  // cos(2 theta)
  double ratio = 1.0;
  for (int k = 0; k < 2; ++k) {
    const double a = p.a[static_cast<std::size_t>(k)];
    const double b = p.b[static_cast<std::size_t>(k)];
    const double c = p.c[static_cast<std::size_t>(k)];
    const double d = p.d[static_cast<std::size_t>(k)];
    const double num = 1.0 + a * a + b * b + 2.0 * b * c2t + 2.0 * a * (1.0 + b) * ct;
    const double den = 1.0 + c * c + d * d + 2.0 * d * c2t + 2.0 * c * (1.0 + d) * ct;
    if (den <= 0.0 || num < 0.0)
      throw numeric_domain_error("filter_amplitude: section magnitude undefined");
    ratio *= num / den;
  }
  return p.gain * std::sqrt(ratio);
}

// Signed approximation error e(x, psi) = |H(x, theta(psi))| - |1 - 2 psi|.
inline double filter_error(const FilterParams& p, double psi) {
  if (psi < 0.0 || psi > 1.0) throw domain_error("filter_error: psi must lie in [0, 1]");
  return filter_amplitude(p, kPi * psi) - std::abs(1.0 - 2.0 * psi);
}

// ---------------------------------------------------------------------------
// Benchmark suite

inline MinimaxProblem make_l1(int n = 3) {
  if (n < 1) throw config_error("L1: dimension must be positive");
  MinimaxProblem p;
  p.id = n == 3 ? "L1" : "L1-n" + std::to_string(n);
  p.n_x = p.n_y = n;
  p.x_bounds = uniform_box(n, 0.0, 10.0);
  p.y_bounds = uniform_box(n, 0.0, 10.0);
  p.evaluator = [](const Vector& x, const Vector& y) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      acc += (x[i] - 5.0) * (x[i] - 5.0) - (y[i] - 5.0) * (y[i] - 5.0);
    return acc;
  };
  Vector center = Vector::Constant(n, 5.0);
  p.optimum = KnownOptimum{center, center, 0.0};
  return p;
}

inline MinimaxProblem make_l2(int n = 3) {
  if (n < 1) throw config_error("L2: dimension must be positive");
  MinimaxProblem p;
  p.id = n == 3 ? "L2" : "L2-n" + std::to_string(n);
  p.n_x = p.n_y = n;
  p.x_bounds = uniform_box(n, 0.0, 10.0);
  p.y_bounds = uniform_box(n, 0.0, 10.0);
  p.evaluator = [](const Vector& x, const Vector& y) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      acc += std::min(3.0 - 0.2 * x[i] + 0.3 * y[i], 3.0 + 0.2 * x[i] - 0.1 * y[i]);
    return acc;
  };
  Vector origin = Vector::Zero(n);
  p.optimum = KnownOptimum{origin, origin, 3.0 * n};
  return p;
}

inline MinimaxProblem make_l3() {
  MinimaxProblem p;
  p.id = "L3";
  p.n_x = p.n_y = 1;
  p.x_bounds = {Interval{0.0, 10.0, true}};  // (0, 10]
  p.y_bounds = {Interval{0.0, 10.0, true}};
  p.evaluator = [](const Vector& x, const Vector& y) {
    return std::sin(x[0] - y[0]) / std::sqrt(x[0] * x[0] + y[0] * y[0]);
  };
  Vector xs(1), ys(1);
  xs << 10.0;
  ys << 2.125683;
  p.optimum = KnownOptimum{xs, ys, p.evaluator(xs, ys)};
  return p;
}

inline MinimaxProblem make_l4() {
  MinimaxProblem p;
  p.id = "L4";
  p.n_x = p.n_y = 1;
  p.x_bounds = uniform_box(1, 0.0, 10.0);
  p.y_bounds = uniform_box(1, 0.0, 10.0);
  p.evaluator = [](const Vector& x, const Vector& y) {
    const double r = std::sqrt(x[0] * x[0] + y[0] * y[0]);
    return std::cos(r) / (r + 10.0);
  };
  Vector xs(1), ys(1);
  xs << 7.044146;
  ys << 0.0;  // y = 10 attains the same value to ~2e-8 and is accepted as optimal too
  p.optimum = KnownOptimum{xs, ys, p.evaluator(xs, ys)};
  return p;
}

inline MinimaxProblem make_l5() {
  MinimaxProblem p;
  p.id = "L5";
  p.n_x = p.n_y = 2;
  p.x_bounds = {Interval{-0.5, 0.5}, Interval{0.0, 1.0}};
  p.y_bounds = uniform_box(2, 0.0, 10.0);
  p.evaluator = [](const Vector& x, const Vector& y) {
    const double t = x[1] - x[0] * x[0];
    return 100.0 * t * t + (1.0 - x[0]) * (1.0 - x[0]) -
           y[0] * (x[0] + x[1] * x[1]) - y[1] * (x[0] * x[0] + x[1]);
  };
  Vector xs(2), ys(2);
  xs << 0.5, 0.25;
  ys << 0.0, 0.0;
  p.optimum = KnownOptimum{xs, ys, 0.25};
  return p;
}

inline MinimaxProblem make_l6() {
  MinimaxProblem p;
  p.id = "L6";
  p.n_x = p.n_y = 2;
  p.x_bounds = uniform_box(2, -1.0, 3.0);
  p.y_bounds = uniform_box(2, 0.0, 10.0);
  p.evaluator = [](const Vector& x, const Vector& y) {
    return (x[0] - 2.0) * (x[0] - 2.0) + (x[1] - 1.0) * (x[1] - 1.0) +
           y[0] * (x[0] * x[0] - x[1]) + y[1] * (x[0] + x[1] - 2.0);
  };
  Vector xs(2);
  xs << 1.0, 1.0;
  p.optimum = KnownOptimum{xs, std::nullopt, 1.0};  // any feasible y attains it
  return p;
}

inline MinimaxProblem make_filter_problem() {
  MinimaxProblem p;
  p.id = "filter";
  p.n_x = 9;
  p.n_y = 1;
  p.x_bounds = uniform_box(9, -1.0, 1.0);
  p.y_bounds = uniform_box(1, 0.0, 1.0);
  p.evaluator = [](const Vector& x, const Vector& y) {
    return std::abs(filter_error(FilterParams::from_vector(x), y[0]));
  };
  // Only the target value is known: a perfect approximation has error 0.
  p.optimum = KnownOptimum{std::nullopt, std::nullopt, 0.0};
  return p;
}

// ---------------------------------------------------------------------------
// Registry

inline std::vector<std::string> builtin_problem_ids() {
  return {"L1", "L2", "L3", "L4", "L5", "L6", "filter"};
}

// Accepts "L1".."L6", "filter" and scaled variants "L1-n<dim>", "L2-n<dim>".
inline MinimaxProblem make_problem(const std::string& id) {
  auto parse_scaled = [&](const std::string& family) -> std::optional<int> {
    const std::string prefix = family + "-n";
    if (id.rfind(prefix, 0) != 0) return std::nullopt;
    const std::string digits = id.substr(prefix.size());
    if (digits.empty() ||
        digits.find_first_not_of("0123456789") != std::string::npos)
      throw config_error("make_problem: malformed scaled id '" + id + "'");
    return std::stoi(digits);
  };
  if (id == "L1") return make_l1();
  if (id == "L2") return make_l2();
  if (id == "L3") return make_l3();
  if (id == "L4") return make_l4();
  if (id == "L5") return make_l5();
  if (id == "L6") return make_l6();
  if (id == "filter") return make_filter_problem();
  if (auto n = parse_scaled("L1")) return make_l1(*n);
  if (auto n = parse_scaled("L2")) return make_l2(*n);
  throw config_error("make_problem: unknown problem id '" + id + "'");
}

// ---------------------------------------------------------------------------
// Manifest

inline nlohmann::json interval_to_json(const Interval& iv) {
  nlohmann::json j{{"lo", iv.lo}, {"hi", iv.hi}};
  if (iv.open_lo) j["open_lo"] = true;
  return j;
}

inline nlohmann::json problem_to_json(const MinimaxProblem& p) {
  nlohmann::json j;
  j["id"] = p.id;
  j["n_x"] = p.n_x;
  j["n_y"] = p.n_y;
  j["x_bounds"] = nlohmann::json::array();
  for (const auto& iv : p.x_bounds) j["x_bounds"].push_back(interval_to_json(iv));
  j["y_bounds"] = nlohmann::json::array();
  for (const auto& iv : p.y_bounds) j["y_bounds"].push_back(interval_to_json(iv));
  if (p.optimum) {
    nlohmann::json opt;
    if (p.optimum->x)
      opt["x"] = std::vector<double>(p.optimum->x->data(),
                                     p.optimum->x->data() + p.optimum->x->size());
    if (p.optimum->y)
      opt["y"] = std::vector<double>(p.optimum->y->data(),
                                     p.optimum->y->data() + p.optimum->y->size());
    else if (p.optimum->x)
      opt["y"] = "any";
    opt["value"] = p.optimum->value;
    j["optimum"] = opt;
  }
  return j;
}

// One record per registered problem, for downstream tooling and docs.
inline nlohmann::json problem_manifest() {
  nlohmann::json j;
  j["problems"] = nlohmann::json::array();
  for (const auto& id : builtin_problem_ids()) {
    auto pj = problem_to_json(make_problem(id));
    pj["scalable"] = (id == "L1" || id == "L2");
    j["problems"].push_back(pj);
  }
  return j;
}

}  // namespace minimax
