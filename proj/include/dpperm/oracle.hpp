// Copyright 2026 The dpperm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPPERM_ORACLE_HPP_
#define DPPERM_ORACLE_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dpperm/random.hpp"
#include "dpperm/statistics.hpp"

namespace dpperm {

// Exact rational permutation p-value: #{arrangements with T >= T_identity},
// identity included, over the total number of arrangements.
struct ExactPValue {
  long long count;
  long long total;

  double value() const {
    return static_cast<double>(count) / static_cast<double>(total);
  }
};

namespace detail {

inline constexpr long kOraclePooledCap = 8;  // 8! = 40320 arrangements

inline long long binomial_coefficient(long n, long k) {
  long long result = 1;
  for (long i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

// All two-sample group assignments as permutations placing a chosen n-subset
// first. The two-sample statistics depend on a permutation only through that
// subset, so enumerating the (n+m choose n) assignments is equivalent to
// enumerating all (n+m)! orderings (both counts scale by n! m!).
inline std::vector<std::vector<std::int32_t>> all_assignments(long n, long m,
                                                              bool skip_identity) {
  const long total = n + m;
  std::vector<std::vector<std::int32_t>> result;
  std::vector<std::int32_t> subset(n);
  std::iota(subset.begin(), subset.end(), 0);
  for (;;) {
    std::vector<std::int32_t> perm;
    perm.reserve(total);
    perm.insert(perm.end(), subset.begin(), subset.end());
    std::vector<bool> used(total, false);
    for (const auto i : subset) used[i] = true;
    for (long i = 0; i < total; ++i) {
      if (!used[i]) perm.push_back(static_cast<std::int32_t>(i));
    }
    const bool is_identity =
        std::is_sorted(perm.begin(), perm.end()) && perm.front() == 0;
    if (!(skip_identity && is_identity)) result.push_back(std::move(perm));

    // next n-combination of [0, total)
    long i = n - 1;
    while (i >= 0 && subset[i] == i + total - n) --i;
    if (i < 0) break;
    ++subset[i];
    for (long j = i + 1; j < n; ++j) subset[j] = subset[j - 1] + 1;
  }
  return result;
}

inline std::vector<std::vector<std::int32_t>> all_z_permutations(
    long n, bool skip_identity) {
  std::vector<std::vector<std::int32_t>> result;
  std::vector<std::int32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    const bool is_identity = std::is_sorted(perm.begin(), perm.end());
    if (!(skip_identity && is_identity)) result.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return result;
}

}  // namespace detail

// Every non-identity arrangement of the statistic's permutation group, for
// feeding the Monte Carlo engine in exhaustive mode (pi_0 supplies the
// identity there).
inline std::vector<std::vector<std::int32_t>> all_permutations_excluding_identity(
    const TwoSampleData& data) {
  if (data.n() + data.m() > detail::kOraclePooledCap) {
    throw std::invalid_argument("oracle: pooled size exceeds the cap of 8");
  }
  return detail::all_assignments(data.n(), data.m(), /*skip_identity=*/true);
}

inline std::vector<std::vector<std::int32_t>> all_permutations_excluding_identity(
    const PairedData& data) {
  if (data.n() > detail::kOraclePooledCap) {
    throw std::invalid_argument("oracle: sample size exceeds the cap of 8");
  }
  return detail::all_z_permutations(data.n(), /*skip_identity=*/true);
}

// Exhaustive permutation p-value
//   p = #{pi : T(X^pi) >= T(X)} / #arrangements,
// counting the identity, in exact integer arithmetic. Two-sample data
// enumerates the distinct group assignments; paired data all n! permutations
// of the Z block.
template <typename Data>
ExactPValue exhaustive_permutation_pvalue(const Data& data,
                                          const StatisticDescriptor& statistic) {
  const auto prepared = prepare_statistic(statistic, data);
  std::vector<std::vector<std::int32_t>> arrangements;
  if constexpr (std::is_same_v<Data, TwoSampleData>) {
    if (data.n() + data.m() > detail::kOraclePooledCap) {
      throw std::invalid_argument("oracle: pooled size exceeds the cap of 8");
    }
    arrangements = detail::all_assignments(data.n(), data.m(), false);
  } else {
    if (data.n() > detail::kOraclePooledCap) {
      throw std::invalid_argument("oracle: sample size exceeds the cap of 8");
    }
    arrangements = detail::all_z_permutations(data.n(), false);
  }
  const double reference = prepared->evaluate(
      identity_permutation(prepared->permutation_size()));
  long long count = 0;
  for (const auto& perm : arrangements) {
    if (prepared->evaluate(perm) >= reference) ++count;
  }
  return {count, static_cast<long long>(arrangements.size())};
}

// Grid search over neighboring dataset pairs maximizing the permuted
// statistic difference: datasets draw every row from `grid` (scalar values,
// paired statistics take all (y,z) grid pairs per row), neighbors replace one
// row, and a deterministic permutation sample (identity, the transposition of
// the first two indices, and seeded uniform draws) supplies the auxiliary
// variable. Errors out above an evaluation budget of 1e7.
inline double brute_force_sensitivity(const StatisticDescriptor& statistic,
                                      long n, long m,
                                      const std::vector<double>& grid,
                                      long random_permutations = 8,
                                      std::uint64_t seed = 20260809) {
  if (grid.size() < 2) {
    throw std::invalid_argument("brute_force_sensitivity: need >= 2 values");
  }
  const bool two_sample = is_two_sample(statistic.kind);
  const long rows = two_sample ? n + m : n;
  const long perm_size = rows;
  const long values = two_sample
                          ? static_cast<long>(grid.size())
                          : static_cast<long>(grid.size() * grid.size());

  double total_evals = 1.0;
  for (long r = 0; r < rows; ++r) total_evals *= static_cast<double>(values);
  total_evals *= static_cast<double>(rows) * (values - 1) *
                 (2 + random_permutations) * 2.0;
  if (total_evals > 1e7) {
    throw std::invalid_argument(
        "brute_force_sensitivity: evaluation budget of 1e7 exceeded");
  }

  std::vector<std::vector<std::int32_t>> perms;
  perms.push_back(identity_permutation(perm_size));
  if (perm_size >= 2) {
    auto transposition = identity_permutation(perm_size);
    std::swap(transposition[0], transposition[1]);
    perms.push_back(std::move(transposition));
  }
  {
    RandomStream stream(seed, StreamPurpose::kPermutation, 0, 0);
    for (long i = 0; i < random_permutations; ++i) {
      perms.push_back(random_permutation(perm_size, stream));
    }
  }

  const auto make_row = [&](long value_index) {
    if (two_sample) {
      Eigen::VectorXd row(1);
      row[0] = grid[value_index];
      return std::pair<Eigen::VectorXd, Eigen::VectorXd>(row, row);
    }
    Eigen::VectorXd y(1), z(1);
    y[0] = grid[value_index / grid.size()];
    z[0] = grid[value_index % grid.size()];
    return std::pair<Eigen::VectorXd, Eigen::VectorXd>(y, z);
  };

  const auto evaluate_dataset = [&](const std::vector<long>& assignment)
      -> std::unique_ptr<PreparedStatistic> {
    Eigen::MatrixXd y(two_sample ? n : rows, 1);
    Eigen::MatrixXd z(two_sample ? m : rows, 1);
    for (long r = 0; r < rows; ++r) {
      const auto [ry, rz] = make_row(assignment[r]);
      if (two_sample) {
        if (r < n) {
          y.row(r) = ry;
        } else {
          z.row(r - n) = ry;
        }
      } else {
        y.row(r) = ry;
        z.row(r) = rz;
      }
    }
    if (two_sample) {
      return prepare_statistic(statistic, TwoSampleData(y, z));
    }
    return prepare_statistic(statistic, PairedData(y, z));
  };

  double best = 0.0;
  std::vector<long> assignment(rows, 0);
  for (;;) {
    const auto base = evaluate_dataset(assignment);
    for (long r = 0; r < rows; ++r) {
      for (long alt = 0; alt < values; ++alt) {
        if (alt == assignment[r]) continue;
        std::vector<long> neighbor = assignment;
        neighbor[r] = alt;
        const auto other = evaluate_dataset(neighbor);
        for (const auto& perm : perms) {
          best = std::max(best, std::abs(base->evaluate(perm) -
                                         other->evaluate(perm)));
        }
      }
    }
    long pos = rows - 1;
    while (pos >= 0 && assignment[pos] == values - 1) {
      assignment[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++assignment[pos];
  }
  return best;
}

}  // namespace dpperm

#endif  // DPPERM_ORACLE_HPP_
