#include <catch2/catch_amalgamated.hpp>

#include <minimax/problems.hpp>

#include "oracle_helpers.hpp"

using namespace minimax;

namespace {
Vector vec(std::initializer_list<double> vals) {
  Vector v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}
}  // namespace

TEST_CASE("evaluate: benchmark values") {
  BudgetCounter budget(100);

  auto l1 = make_l1();
  CHECK(evaluate(l1, vec({5, 5, 5}), vec({5, 5, 5}), budget) == 0.0);
  CHECK(evaluate(l1, vec({0, 0, 0}), vec({5, 5, 5}), budget) == 75.0);

  auto l6 = make_l6();
  CHECK(evaluate(l6, vec({1, 1}), vec({3, 7}), budget) == 1.0);

  auto l5 = make_l5();
  CHECK(evaluate(l5, vec({0.5, 0.25}), vec({0, 0}), budget) == 0.25);

  CHECK(budget.used() == 4);
}

TEST_CASE("evaluate: L3 optimum matches a dense grid over y") {
  auto l3 = make_l3();
  BudgetCounter budget(10);
  const double at_opt = evaluate(l3, vec({10}), vec({2.125683}), budget);
  CHECK(at_opt == Catch::Approx(0.0977943).margin(1e-6));

  const auto [y_best, v_best] = test_oracle::grid_max_1d(
      [&](double y) { return l3.evaluator(vec({10}), vec({y})); }, 1e-9, 10.0,
      1000001);
  CHECK(std::abs(v_best - at_opt) < 1e-6);
  CHECK(std::abs(y_best - 2.125683) < 1e-3);
}

TEST_CASE("evaluate: domain and budget errors") {
  auto l1 = make_l1();
  BudgetCounter budget(2);
  CHECK_THROWS_AS(evaluate(l1, vec({-1, 0, 0}), vec({5, 5, 5}), budget), domain_error);
  CHECK_THROWS_AS(evaluate(l1, vec({0, 0}), vec({5, 5, 5}), budget), dimension_error);
  evaluate(l1, vec({0, 0, 0}), vec({5, 5, 5}), budget);
  evaluate(l1, vec({0, 0, 0}), vec({5, 5, 5}), budget);
  CHECK_THROWS_AS(evaluate(l1, vec({0, 0, 0}), vec({5, 5, 5}), budget),
                  budget_exhausted);
  CHECK(budget.used() == 2);  // failed calls never consume budget

  // Open lower bound of L3: 0 itself is infeasible.
  auto l3 = make_l3();
  BudgetCounter b3(2);
  CHECK_THROWS_AS(evaluate(l3, vec({0.0}), vec({1.0}), b3), domain_error);
  CHECK_NOTHROW(evaluate(l3, vec({1e-8}), vec({1.0}), b3));
}

TEST_CASE("saddle_value: known optima") {
  CHECK(saddle_value(make_l1()).value() == 0.0);
  CHECK(saddle_value(make_l6()).value() == 1.0);
  CHECK(saddle_value(make_l2()).value() == 9.0);

  MinimaxProblem anon = make_l1();
  anon.optimum.reset();
  CHECK_FALSE(saddle_value(anon).has_value());
}

TEST_CASE("saddle_value: L2 value confirmed by per-coordinate grid") {
  // L2 is coordinate-separable, so the 3-D min-max reduces to the 1-D one.
  auto term = [](double x, double y) {
    return std::min(3.0 - 0.2 * x + 0.3 * y, 3.0 + 0.2 * x - 0.1 * y);
  };
  double best = 1e300;
  double best_x = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double x = 10.0 * i / 1000.0;
    double worst = -1e300;
    for (int j = 0; j <= 1000; ++j) worst = std::max(worst, term(x, 10.0 * j / 1000.0));
    if (worst < best) {
      best = worst;
      best_x = x;
    }
  }
  CHECK(best == Catch::Approx(3.0).margin(1e-9));
  CHECK(best_x == Catch::Approx(0.0).margin(1e-9));
  CHECK(saddle_value(make_l2()).value() == Catch::Approx(3.0 * 3));
}

TEST_CASE("known optima satisfy evaluator(x*, y*) = L*") {
  for (const auto& id : builtin_problem_ids()) {
    auto p = make_problem(id);
    REQUIRE(p.optimum.has_value());
    if (!p.optimum->x) continue;  // value-only optimum (filter)
    if (p.optimum->y) {
      CHECK(std::abs(p.evaluator(*p.optimum->x, *p.optimum->y) - p.optimum->value) <=
            1e-9);
    } else {
      // "any y": spot-check 100 random maximizers
      Rng rng(7);
      for (int i = 0; i < 100; ++i) {
        const Vector y = rng.uniform_in(p.y_bounds);
        CHECK(std::abs(p.evaluator(*p.optimum->x, y) - p.optimum->value) <= 1e-9);
      }
    }
  }
}

TEST_CASE("L4: both listed inner maximizers are optimal") {
  auto l4 = make_l4();
  const double star = l4.optimum->value;
  CHECK(std::abs(l4.evaluator(vec({7.044146}), vec({0.0})) - star) <= 1e-4);
  CHECK(std::abs(l4.evaluator(vec({7.044146}), vec({10.0})) - star) <= 1e-4);
}

TEST_CASE("saddle inequality spot-check on symmetric problems") {
  for (const auto& id : {std::string("L1"), std::string("L6")}) {
    auto p = make_problem(id);
    const Vector& xs = *p.optimum->x;
    Rng rng(13);
    // L6 attains its optimal value for every y, but the saddle-partner that
    // also makes x* a global minimizer of L(., y) is y = (2/3, 2/3) (the
    // unique zero of the x-gradient at x*).
    const Vector ys = p.optimum->y ? *p.optimum->y : Vector::Constant(2, 2.0 / 3.0);
    const double center = p.evaluator(xs, ys);
    for (int i = 0; i < 1000; ++i) {
      const Vector x = rng.uniform_in(p.x_bounds);
      const Vector y = rng.uniform_in(p.y_bounds);
      CHECK(p.evaluator(xs, y) <= center + 1e-9);
      CHECK(center <= p.evaluator(x, ys) + 1e-9);
    }
  }
}

TEST_CASE("L1/L2 scalable dimensions") {
  for (int n : {2, 5, 10, 15, 20, 40, 50}) {
    auto l1 = make_l1(n);
    auto l2 = make_l2(n);
    CHECK(l1.n_x == n);
    CHECK(l2.n_y == n);
    CHECK(saddle_value(l2).value() == Catch::Approx(3.0 * n));
    Rng rng(100 + n);
    const Vector x = rng.uniform_in(l1.x_bounds);
    const Vector y = rng.uniform_in(l1.y_bounds);

    // Additivity: duplicating inputs into dimension 2n doubles the value.
    auto l1_double = make_l1(2 * n);
    Vector x2(2 * n), y2(2 * n);
    x2 << x, x;
    y2 << y, y;
    CHECK(l1_double.evaluator(x2, y2) ==
          Catch::Approx(2.0 * l1.evaluator(x, y)).margin(1e-9));
  }
}

TEST_CASE("mse: examples and properties") {
  CHECK(mse(vec({5, 5, 5}), vec({5, 5, 5})) == 0.0);
  CHECK(mse(vec({6, 6, 6}), vec({5, 5, 5})) == 1.0);
  CHECK(mse(vec({1, 3}), vec({0, 0})) == 5.0);
  CHECK_THROWS_AS(mse(vec({1, 2}), vec({1, 2, 3})), dimension_error);

  Rng rng(99);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 1 + static_cast<int>(rng.index(6));
    Vector a = rng.gaussian_vector(n), b = rng.gaussian_vector(n);
    CHECK(mse(a, b) >= 0.0);
    CHECK((mse(a, b) == 0.0) == ((a - b).norm() == 0.0));
    // invariance under a common coordinate permutation (rotate by one)
    Vector ap(n), bp(n);
    for (int i = 0; i < n; ++i) {
      ap[i] = a[(i + 1) % n];
      bp[i] = b[(i + 1) % n];
    }
    CHECK(mse(ap, bp) == Catch::Approx(mse(a, b)).margin(1e-12));
  }
}

TEST_CASE("filter amplitude and error") {
  FilterParams identity;
  CHECK(filter_amplitude(identity, 0.3) == Catch::Approx(1.0));
  CHECK(filter_amplitude(identity, 2.9) == Catch::Approx(1.0));

  FilterParams zero = identity;
  zero.gain = 0.0;
  CHECK(filter_amplitude(zero, 1.0) == 0.0);

  FilterParams doubled = identity;
  doubled.gain = 2.0;
  CHECK(filter_amplitude(doubled, kPi / 2) == Catch::Approx(2.0));

  CHECK(filter_error(identity, 0.0) == Catch::Approx(0.0).margin(1e-12));
  CHECK(filter_error(identity, 0.5) == Catch::Approx(1.0));
  CHECK(filter_error(identity, 1.0) == Catch::Approx(0.0).margin(1e-12));

  // Pole on the unit circle at theta = 0: denominator section vanishes.
  FilterParams pole = identity;
  pole.c = {0.0, 0.0};
  pole.d = {-1.0, 0.0};
  CHECK_THROWS_AS(filter_error(pole, 0.0), numeric_domain_error);

  CHECK_THROWS_AS(filter_error(identity, 1.5), domain_error);
  CHECK_THROWS_AS(FilterParams::from_vector(Vector::Zero(5)), dimension_error);

  // Round trip through the flattened layout.
  Rng rng(3);
  const Vector x = rng.gaussian_vector(9);
  CHECK((FilterParams::from_vector(x).to_vector() - x).norm() == 0.0);
}

TEST_CASE("filter problem definition") {
  auto p = make_filter_problem();
  CHECK(p.n_x == 9);
  CHECK(p.n_y == 1);
  CHECK(saddle_value(p).value() == 0.0);
  BudgetCounter budget(5);
  Vector x0 = Vector::Zero(9);
  x0[0] = 1.0;  // identity filter
  CHECK(evaluate(p, x0, vec({0.25}), budget) ==
        Catch::Approx(std::abs(1.0 - 0.5)).margin(1e-12));
}

TEST_CASE("registry ids") {
  CHECK(make_problem("L1").id == "L1");
  CHECK(make_problem("L1-n20").n_x == 20);
  CHECK(make_problem("L2-n5").id == "L2-n5");
  CHECK(make_problem("filter").n_x == 9);
  CHECK_THROWS_AS(make_problem("L7"), config_error);
  CHECK_THROWS_AS(make_problem("L3-n5"), config_error);
  CHECK_THROWS_AS(make_problem("L1-nx"), config_error);
}

TEST_CASE("manifest lists every builtin problem") {
  const auto manifest = problem_manifest();
  REQUIRE(manifest.contains("problems"));
  const auto& list = manifest["problems"];
  CHECK(list.size() == builtin_problem_ids().size());
  for (const auto& entry : list) {
    const auto p = make_problem(entry["id"].get<std::string>());
    CHECK(entry["n_x"].get<int>() == p.n_x);
    CHECK(entry["n_y"].get<int>() == p.n_y);
    CHECK(entry["x_bounds"].size() == static_cast<std::size_t>(p.n_x));
    if (p.optimum)
      CHECK(entry["optimum"]["value"].get<double>() == p.optimum->value);
  }
  // L3's open lower bound must be visible to downstream consumers.
  for (const auto& entry : list)
    if (entry["id"] == "L3") CHECK(entry["x_bounds"][0]["open_lo"].get<bool>());
}

TEST_CASE("BudgetCounter invariants") {
  CHECK_THROWS_AS(BudgetCounter(0), config_error);
  BudgetCounter b(3);
  CHECK(b.remaining() == 3);
  b.charge();
  b.charge();
  b.charge();
  CHECK(b.used() == 3);
  CHECK_THROWS_AS(b.charge(), budget_exhausted);
  CHECK(b.used() == 3);  // never exceeds the cap
}
