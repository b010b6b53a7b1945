#pragma once

// Rank-based comparison statistics: Friedman test over a problems-by-
// algorithms regret matrix (midrank tie handling, chi-square p-value) and
// the Nemenyi post-hoc critical difference.

#include "minimax/common.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <numeric>

namespace minimax {

// Midranks of one row, 1-based: tied entries share the average of the ranks
// they span.
inline std::vector<double> midranks(const std::vector<double>& values) {
  const std::size_t k = values.size();
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(k, 0.0);
  std::size_t i = 0;
  while (i < k) {
    std::size_t j = i;
    while (j + 1 < k && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double shared = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = shared;
    i = j + 1;
  }
  return ranks;
}

// Problems (rows) by algorithms (columns); entries are aggregated regrets.
struct RankMatrix {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<double>> values;  // N rows of k entries
  std::vector<std::vector<double>> ranks;   // midranks per row

  std::size_t rows() const { return values.size(); }
  std::size_t cols() const { return col_labels.size(); }

  static RankMatrix from_values(std::vector<std::string> row_labels,
                                std::vector<std::string> col_labels,
                                std::vector<std::vector<double>> values) {
    RankMatrix m;
    m.row_labels = std::move(row_labels);
    m.col_labels = std::move(col_labels);
    m.values = std::move(values);
    if (m.values.size() != m.row_labels.size())
      throw dimension_error("RankMatrix: one row label per row required");
    m.ranks.reserve(m.values.size());
    for (const auto& row : m.values) {
      if (row.size() != m.col_labels.size())
        throw dimension_error("RankMatrix: ragged rows");
      m.ranks.push_back(midranks(row));
    }
    return m;
  }

  std::vector<double> average_ranks() const {
    std::vector<double> avg(cols(), 0.0);
    for (const auto& row : ranks)
      for (std::size_t j = 0; j < row.size(); ++j) avg[j] += row[j];
    for (auto& a : avg) a /= static_cast<double>(rows());
    return avg;
  }
};

struct FriedmanResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int k = 0;  // algorithms
  int N = 0;  // evaluators (problems)
};

// chi2_F = 12 N / (k (k+1)) * ( sum_j Rbar_j^2 - k (k+1)^2 / 4 ), where
// Rbar_j are average midranks; the p-value uses the chi-square reference
// with k-1 degrees of freedom.
inline FriedmanResult friedman_test(const RankMatrix& m) {
  const int k = static_cast<int>(m.cols());
  const int N = static_cast<int>(m.rows());
  if (k < 2 || N < 2)
    throw config_error("friedman_test: need at least 2 algorithms and 2 evaluators");
  const auto avg = m.average_ranks();
  double sum_sq = 0.0;
  for (double r : avg) sum_sq += r * r;
  const double kd = static_cast<double>(k);
  double stat = 12.0 * N / (kd * (kd + 1.0)) *
                (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0);
  if (stat < 0.0 && stat > -1e-12) stat = 0.0;  // numerical dust on tied data
  boost::math::chi_squared dist(kd - 1.0);
  const double p = stat <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, stat));
  return {stat, p, k, N};
}

// Studentized-range-based q_alpha for the Nemenyi test, k = 2..10.
// Standard two-tailed table at alpha = 0.05 and 0.10.
inline double nemenyi_q(int k, double alpha) {
  static constexpr double q05[] = {1.960, 2.343, 2.569, 2.728, 2.850,
                                   2.949, 3.031, 3.102, 3.164};
  static constexpr double q10[] = {1.645, 2.052, 2.291, 2.459, 2.589,
                                   2.693, 2.780, 2.855, 2.920};
  if (k < 2 || k > 10)
    throw config_error("nemenyi_q: table covers 2 <= k <= 10");
  const bool a05 = std::abs(alpha - 0.05) < 1e-12;
  const bool a10 = std::abs(alpha - 0.10) < 1e-12;
  if (!a05 && !a10)
    throw config_error("nemenyi_q: alpha must be 0.05 or 0.10");
  return (a05 ? q05 : q10)[k - 2];
}

// CD = q_alpha(k) * sqrt( k (k+1) / (6 N) ): the minimum average-rank gap
// that counts as significant.
inline double nemenyi_cd(int k, int N, double alpha) {
  if (N < 1) throw config_error("nemenyi_cd: N must be >= 1");
  const double kd = static_cast<double>(k);
  return nemenyi_q(k, alpha) * std::sqrt(kd * (kd + 1.0) / (6.0 * N));
}

}  // namespace minimax
