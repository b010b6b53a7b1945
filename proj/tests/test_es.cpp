#include <catch2/catch_amalgamated.hpp>

#include <minimax/es.hpp>
#include <minimax/problems.hpp>

#include "oracle_helpers.hpp"

using namespace minimax;

TEST_CASE("sample_perturbations: mirrored pairs") {
  Rng rng(1);
  const auto eps = sample_perturbations(rng, 4, 3, true);
  REQUIRE(eps.size() == 4);
  CHECK((eps[1] + eps[0]).norm() == 0.0);
  CHECK((eps[3] + eps[2]).norm() == 0.0);
  Vector sum = Vector::Zero(3);
  for (const auto& e : eps) sum += e;
  CHECK(sum.norm() == 0.0);

  CHECK_THROWS_AS(sample_perturbations(rng, 5, 3, true), config_error);
  CHECK_THROWS_AS(sample_perturbations(rng, 1, 3, false), config_error);
}

TEST_CASE("sample_perturbations: law of large numbers") {
  Rng rng(42);
  const auto eps = sample_perturbations(rng, 10000, 1, false);
  double mean = 0.0, var = 0.0;
  for (const auto& e : eps) mean += e[0];
  mean /= 10000.0;
  for (const auto& e : eps) var += (e[0] - mean) * (e[0] - mean);
  var /= 10000.0;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.1);
}

TEST_CASE("standardize_fitness: examples") {
  CHECK(standardize_fitness({3, 3, 3}) == std::vector<double>{0, 0, 0});
  const auto two = standardize_fitness({0, 2});
  CHECK(two[0] == Catch::Approx(-1.0));
  CHECK(two[1] == Catch::Approx(1.0));

  const auto four = standardize_fitness({1, 2, 3, 4});
  double mean = 0.0, var = 0.0;
  for (double v : four) mean += v;
  mean /= 4.0;
  for (double v : four) var += (v - mean) * (v - mean);
  var /= 4.0;
  CHECK(std::abs(mean) < 1e-12);
  CHECK(std::sqrt(var) == Catch::Approx(1.0));
  CHECK(std::is_sorted(four.begin(), four.end()));

  CHECK_THROWS_AS(standardize_fitness({}), dimension_error);
}

TEST_CASE("standardize_fitness: idempotent on nonconstant input") {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> f;
    for (int i = 0; i < 16; ++i) f.push_back(rng.uniform(-3, 9));
    const auto once = standardize_fitness(f);
    const auto twice = standardize_fitness(once);
    for (std::size_t i = 0; i < f.size(); ++i)
      CHECK(std::abs(once[i] - twice[i]) <= 1e-12);
  }
}

TEST_CASE("nes_step: equal fitnesses leave the mean unchanged") {
  const Box bounds = uniform_box(3, 0, 10);
  auto s = make_nes_state(Vector::Constant(3, 5.0), bounds, 8, false);
  Rng rng(2);
  const auto eps = sample_perturbations(rng, 8, 3, false);
  const auto next = nes_step(s, standardize_fitness(std::vector<double>(8, 4.2)), eps);
  CHECK((next.mu - s.mu).norm() == 0.0);
}

TEST_CASE("nes_step: linear fitness moves the mean with the slope") {
  const Box bounds = {Interval{-100.0, 100.0}};
  for (double c : {2.5, -2.5}) {
    auto s = make_nes_state(Vector::Zero(1), bounds, 10000, false, 1e-4, 0.25 / 200.0);
    s.sigma = 0.25;
    Rng rng(7);
    const auto eps = sample_perturbations(rng, 10000, 1, false);
    std::vector<double> f(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i)
      f[i] = c * (s.mu[0] + s.sigma * eps[i][0]);
    const auto next = nes_step(s, standardize_fitness(f), eps);
    const double step = next.mu[0] - s.mu[0];
    CHECK(step * c > 0.0);  // ascent follows the sign of the slope
  }
}

TEST_CASE("nes_step: batch size must match lambda") {
  const Box bounds = uniform_box(2, 0, 1);
  auto s = make_nes_state(Vector::Constant(2, 0.5), bounds, 6, false);
  Rng rng(3);
  const auto eps = sample_perturbations(rng, 4, 2, false);
  CHECK_THROWS_AS(nes_step(s, standardize_fitness({1, 2, 3, 4}), eps), dimension_error);
}

TEST_CASE("antithetic variance dominance of the raw update on a linear function") {
  // The raw gradient-estimate update carries an O(f(x)/sigma) baseline term;
  // mirrored pairs cancel it (and every even Taylor term) exactly, so their
  // estimator variance over seeds must be strictly smaller.
  auto L = [](const Vector& v) { return 5.0 + 3.0 * v[0]; };
  const Vector x = Vector::Zero(1);
  auto collect = [&](bool antithetic) {
    std::vector<double> estimates;
    for (int seed = 0; seed < 100; ++seed) {
      Rng rng(1000 + seed);
      estimates.push_back(descent_direction(L, x, 0.25, 32, rng, antithetic)[0]);
    }
    double mean = 0.0, var = 0.0;
    for (double v : estimates) mean += v;
    mean /= estimates.size();
    for (double v : estimates) var += (v - mean) * (v - mean);
    return var / estimates.size();
  };
  CHECK(collect(true) < collect(false));
}

TEST_CASE("descent_direction: quadratic bowl") {
  Rng rng(11);
  std::uint64_t calls = 0;
  auto L = [&](const Vector& v) {
    ++calls;
    return v.squaredNorm();
  };
  Vector x(2);
  x << 1.0, 0.0;
  const Vector est = descent_direction(L, x, 1e-3, 100000, rng);
  CHECK(calls == 100000);
  Vector neg_grad(2);
  neg_grad << -2.0, 0.0;
  CHECK(test_oracle::cosine(est, neg_grad) > 0.99);
}

TEST_CASE("descent_direction: constant landscape has zero expectation") {
  Vector x = Vector::Zero(3);
  auto L = [](const Vector&) { return 7.5; };
  // Mirrored pairs cancel a constant exactly, every seed.
  std::vector<double> norms;
  for (int seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    norms.push_back(descent_direction(L, x, 1e-3, 64, rng).norm());
  }
  for (double n : norms) CHECK(n <= 1e-9);
}

TEST_CASE("descent_direction: L1 gradient at the origin") {
  auto l1 = make_l1();
  BudgetCounter budget(20000);
  Rng rng(17);
  Vector x = Vector::Zero(3);
  Vector y_star = Vector::Constant(3, 5.0);
  const Vector est = descent_direction(l1, x, y_star, 1e-2, 10000, budget, rng);
  CHECK(budget.used() == 10000);
  const Vector expected = Vector::Constant(3, 10.0);  // -grad of (x-5)^2 terms
  CHECK(test_oracle::cosine(est, expected) > 0.95);
}

TEST_CASE("descent_direction: budget exhaustion propagates") {
  auto l1 = make_l1();
  BudgetCounter budget(50);
  Rng rng(23);
  CHECK_THROWS_AS(descent_direction(l1, Vector::Constant(3, 2.0),
                                    Vector::Constant(3, 5.0), 1e-2, 100, budget, rng),
                  budget_exhausted);
}
