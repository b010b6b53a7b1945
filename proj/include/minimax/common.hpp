#pragma once

// Core vocabulary shared by every engine in the toolkit: box domains,
// seeded RNG streams, evaluation-budget metering and run traces.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace minimax {

using Vector = Eigen::VectorXd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Fitness assigned to a point whose objective is numerically undefined.
// Kept finite so batch statistics (mean/std) stay representable.
inline constexpr double kPenaltyFitness = 1e100;

enum class OptMode { minimize, maximize };

// ---------------------------------------------------------------------------
// Errors

struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct domain_error : std::domain_error {
  using std::domain_error::domain_error;
};

// Objective value is mathematically undefined at the queried point
// (e.g. a non-positive factor under a square root).
struct numeric_domain_error : std::domain_error {
  using std::domain_error::domain_error;
};

struct budget_exhausted : std::runtime_error {
  budget_exhausted() : std::runtime_error("evaluation budget exhausted") {}
};

// ---------------------------------------------------------------------------
// Intervals and boxes

// Feasibility margin used when an interval excludes its lower endpoint:
// points are kept at least this far above the open bound.
inline constexpr double kOpenBoundMargin = 1e-9;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool open_lo = false;  // "(lo, hi]" rather than "[lo, hi]"

  double width() const { return hi - lo; }
  double min_feasible() const { return open_lo ? lo + kOpenBoundMargin : lo; }
  bool contains(double v) const {
    return v <= hi && (open_lo ? v > lo : v >= lo);
  }
  double clamp(double v) const { return std::min(hi, std::max(min_feasible(), v)); }
};

using Box = std::vector<Interval>;

inline Box uniform_box(int n, double lo, double hi, bool open_lo = false) {
  if (n < 1 || !(lo < hi)) throw config_error("uniform_box: need n >= 1 and lo < hi");
  return Box(static_cast<std::size_t>(n), Interval{lo, hi, open_lo});
}

inline bool in_box(const Box& box, const Vector& v) {
  if (static_cast<std::size_t>(v.size()) != box.size()) return false;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!box[static_cast<std::size_t>(i)].contains(v[i])) return false;
  return true;
}

// Componentwise projection onto the box.
inline Vector project(const Box& box, Vector v) {
  if (static_cast<std::size_t>(v.size()) != box.size())
    throw dimension_error("project: vector/box dimension mismatch");
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = box[static_cast<std::size_t>(i)].clamp(v[i]);
  return v;
}

inline double mean_width(const Box& box) {
  if (box.empty()) throw config_error("mean_width: empty box");
  double acc = 0.0;
  for (const auto& iv : box) acc += iv.width();
  return acc / static_cast<double>(box.size());
}

// ---------------------------------------------------------------------------
// RNG
//
// Every stochastic component receives an explicit Rng; nothing draws from
// global state. Streams for sub-tasks are derived with mix_seed so that
// runs stay reproducible under any scheduling.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the tag
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return splitmix64(seed ^ h);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
  }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }

  // Marsaglia polar method with an explicit spare so the stream is fully
  // defined by this class, independent of library internals.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  std::size_t index(std::size_t n) {
    if (n == 0) throw config_error("Rng::index: empty range");
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_);
  }

  Vector gaussian_vector(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = gaussian();
    return v;
  }

  Vector uniform_in(const Box& box) {
    Vector v(static_cast<Eigen::Index>(box.size()));
    for (std::size_t i = 0; i < box.size(); ++i)
      v[static_cast<Eigen::Index>(i)] = box[i].clamp(uniform(box[i].lo, box[i].hi));
    return v;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// ---------------------------------------------------------------------------
// Budget metering
//
// The universal currency: one unit per oracle query. Counters are owned by
// exactly one run; problems themselves stay stateless.

class BudgetCounter {
 public:
  explicit BudgetCounter(std::uint64_t cap) : cap_(cap) {
    if (cap == 0) throw config_error("BudgetCounter: cap must be positive");
  }

  // Reserves one evaluation; throws budget_exhausted once the cap is hit so
  // callers can unwind and finish cleanly.
  void charge() {
    if (used_ == cap_) throw budget_exhausted();
    ++used_;
  }

  std::uint64_t used() const { return used_; }
  std::uint64_t cap() const { return cap_; }
  std::uint64_t remaining() const { return cap_ - used_; }

 private:
  std::uint64_t used_ = 0;
  std::uint64_t cap_;
};

// ---------------------------------------------------------------------------
// Run records

struct SolutionRecord {
  Vector x;
  Vector y;
  double value = std::numeric_limits<double>::infinity();
  std::uint64_t budget_used = 0;
};

// Best-so-far history of one run: values are non-increasing and each record
// notes the budget consumed when it was taken.
struct RunTrace {
  std::string problem_id;
  std::string algorithm_id;
  std::uint64_t seed = 0;
  std::uint64_t budget_cap = 0;
  std::uint64_t evals_used = 0;
  std::vector<SolutionRecord> best_records;

  bool empty() const { return best_records.empty(); }

  const SolutionRecord& best() const {
    if (best_records.empty()) throw std::logic_error("RunTrace: no records");
    return best_records.back();
  }

  // Appends a snapshot only when it improves on the incumbent.
  bool record_if_better(const Vector& x, const Vector& y, double value,
                        std::uint64_t budget_used) {
    if (!best_records.empty() && !(value < best_records.back().value)) return false;
    best_records.push_back(SolutionRecord{x, y, value, budget_used});
    return true;
  }
};

}  // namespace minimax
