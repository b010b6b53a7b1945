#include <catch2/catch_amalgamated.hpp>

#include <minimax/stats.hpp>

using namespace minimax;

namespace {

// Independent recomputation of the Friedman statistic: explicit midrank
// assignment per row, then the textbook formula.
double friedman_brute_force(const std::vector<std::vector<double>>& values) {
  const std::size_t N = values.size();
  const std::size_t k = values[0].size();
  std::vector<double> rank_sum(k, 0.0);
  for (const auto& row : values) {
    for (std::size_t j = 0; j < k; ++j) {
      double less = 0.0, equal = 0.0;
      for (std::size_t l = 0; l < k; ++l) {
        if (row[l] < row[j]) ++less;
        if (row[l] == row[j]) ++equal;
      }
      rank_sum[j] += less + 0.5 * (equal + 1.0);  // midrank, 1-based
    }
  }
  double sum_sq = 0.0;
  for (double r : rank_sum) {
    const double avg = r / static_cast<double>(N);
    sum_sq += avg * avg;
  }
  const double kd = static_cast<double>(k);
  return 12.0 * static_cast<double>(N) / (kd * (kd + 1.0)) *
         (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0);
}

RankMatrix matrix_from(const std::vector<std::vector<double>>& values) {
  std::vector<std::string> rows, cols;
  for (std::size_t i = 0; i < values.size(); ++i) rows.push_back("p" + std::to_string(i));
  for (std::size_t j = 0; j < values[0].size(); ++j) cols.push_back("a" + std::to_string(j));
  return RankMatrix::from_values(rows, cols, values);
}

}  // namespace

TEST_CASE("midranks: ties share the average rank") {
  const auto r = midranks({3.0, 1.0, 3.0, 2.0});
  CHECK(r == std::vector<double>{3.5, 1.0, 3.5, 2.0});
  CHECK(midranks({5.0, 5.0, 5.0}) == std::vector<double>{2.0, 2.0, 2.0});
}

TEST_CASE("friedman_test: identical columns give statistic 0 and p = 1") {
  const auto m = matrix_from({{1, 1, 1}, {4, 4, 4}, {0.5, 0.5, 0.5}});
  const auto fr = friedman_test(m);
  CHECK(fr.statistic == Catch::Approx(0.0).margin(1e-12));
  CHECK(fr.p_value == Catch::Approx(1.0));
}

TEST_CASE("friedman_test: consistent extremes are significant") {
  // algorithm 0 always best, algorithm 3 always worst on N = 6 evaluators
  std::vector<std::vector<double>> values;
  for (int i = 0; i < 6; ++i)
    values.push_back({0.0 + i, 1.5 + i, 2.5 + i, 4.0 + i});
  const auto fr = friedman_test(matrix_from(values));
  CHECK(fr.statistic == Catch::Approx(18.0));
  CHECK(fr.p_value < 0.05);
}

TEST_CASE("friedman_test: invariant to column permutation") {
  std::vector<std::vector<double>> values{{3, 1, 2, 5}, {2, 2, 4, 1}, {9, 7, 8, 8}};
  std::vector<std::vector<double>> permuted;
  for (const auto& row : values) permuted.push_back({row[2], row[0], row[3], row[1]});
  CHECK(friedman_test(matrix_from(values)).statistic ==
        Catch::Approx(friedman_test(matrix_from(permuted)).statistic).margin(1e-12));
}

TEST_CASE("friedman_test: matches brute force on random matrices with ties") {
  Rng rng(404);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t N = 2 + rng.index(4);  // up to 5 rows
    const std::size_t k = 2 + rng.index(4);  // up to 5 columns
    std::vector<std::vector<double>> values(N, std::vector<double>(k));
    for (auto& row : values)
      for (auto& v : row) v = std::round(rng.uniform(0, 6)) / 2.0;  // deliberate ties
    const auto fr = friedman_test(matrix_from(values));
    CHECK(fr.statistic == Catch::Approx(friedman_brute_force(values)).margin(1e-9));
  }
}

TEST_CASE("friedman_test: degenerate shapes are rejected") {
  CHECK_THROWS_AS(friedman_test(matrix_from({{1.0, 2.0}})), config_error);
  CHECK_THROWS_AS(friedman_test(matrix_from({{1.0}, {2.0}})), config_error);
}

TEST_CASE("nemenyi_cd: reference value at k=4, N=6") {
  CHECK(nemenyi_cd(4, 6, 0.05) ==
        Catch::Approx(2.569 * std::sqrt(20.0 / 36.0)).margin(1e-3));
  CHECK(nemenyi_cd(4, 6, 0.05) == Catch::Approx(1.915).margin(1e-3));
}

TEST_CASE("nemenyi_cd: scaling and limits") {
  CHECK(nemenyi_cd(2, 4, 0.05) == Catch::Approx(nemenyi_cd(2, 1, 0.05) / 2.0));
  double last = 1e300;
  for (int N : {1, 2, 5, 10, 100, 10000}) {
    const double cd = nemenyi_cd(3, N, 0.10);
    CHECK(cd < last);
    last = cd;
  }
  CHECK(last < 0.05);  // CD -> 0 as N grows
  // q values grow with k at fixed alpha
  for (int k = 3; k <= 10; ++k) CHECK(nemenyi_q(k, 0.05) > nemenyi_q(k - 1, 0.05));
}

TEST_CASE("nemenyi_cd: unsupported parameters") {
  CHECK_THROWS_AS(nemenyi_cd(4, 6, 0.01), config_error);
  CHECK_THROWS_AS(nemenyi_cd(11, 6, 0.05), config_error);
  CHECK_THROWS_AS(nemenyi_cd(1, 6, 0.05), config_error);
  CHECK_THROWS_AS(nemenyi_cd(4, 0, 0.05), config_error);
}

TEST_CASE("RankMatrix: average ranks sum to k(k+1)/2 without ties") {
  const auto m = matrix_from({{3, 1, 2}, {1, 2, 3}, {2, 3, 1}});
  const auto avg = m.average_ranks();
  double total = 0.0;
  for (double a : avg) total += a;
  CHECK(total == Catch::Approx(6.0));  // 3*4/2
}
