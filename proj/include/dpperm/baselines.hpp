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

#ifndef DPPERM_BASELINES_HPP_
#define DPPERM_BASELINES_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dpperm/dp_perm.hpp"

namespace dpperm {

// Thrown when SARRM (or TOT) cannot be run at the requested privacy and
// significance levels for the given sample size.
class infeasible_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Truncated-Uniform-Laplace distribution, scale parameter b = e^{-eps}.

struct TulapParam {
  double b;

  explicit TulapParam(double b_in) : b(b_in) {
    if (!(b > 0.0 && b < 1.0)) {
      throw std::invalid_argument("TulapParam: b must lie in (0,1)");
    }
  }

  static TulapParam from_epsilon(double epsilon) {
    if (!(epsilon > 0.0)) {
      throw std::invalid_argument("TulapParam: epsilon must be positive");
    }
    return TulapParam(std::exp(-epsilon));
  }
};

// Tulap CDF, with [x]_near the nearest integer. Satisfies F(x) + F(-x) = 1;
// continuous everywhere including half-integers.
inline double tulap_cdf(const TulapParam& param, double x) {
  const double b = param.b;
  const double rx = std::round(x);
  if (x <= 0.0) {
    return std::pow(b, -rx) / (1.0 + b) *
           (b + (x - rx + 0.5) * (1.0 - b));
  }
  return 1.0 - std::pow(b, rx) / (1.0 + b) *
                   (b + (rx - x + 0.5) * (1.0 - b));
}

// Tulap draw as g1 - g2 + u with g1, g2 ~ Geometric(1-b) on {0,1,...} and
// u ~ Uniform(-1/2, 1/2); consumes three uniforms.
inline double tulap_sample(const TulapParam& param, RandomStream& stream) {
  const std::int64_t g1 = geometric_sample(param.b, stream);
  const std::int64_t g2 = geometric_sample(param.b, stream);
  const double u = stream.uniform01() - 0.5;
  return static_cast<double>(g1 - g2) + u;
}

// ---------------------------------------------------------------------------
// Shared subsample-and-aggregate plumbing.

namespace detail {

// Smallest number of rows per sample a sub-test block needs.
inline long min_block_rows(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::kMmdV:
    case StatisticKind::kMeanDiff:
      return 1;
    case StatisticKind::kMmdU:
    case StatisticKind::kHsicV:
      return 2;
    case StatisticKind::kHsicU:
      return 4;
  }
  return 1;
}

inline std::vector<std::int32_t> shuffled_indices(long n, std::uint64_t seed,
                                                  std::uint64_t block) {
  RandomStream stream(seed, StreamPurpose::kShuffle, block, 0);
  return random_permutation(static_cast<std::size_t>(n), stream);
}

// Near-equal contiguous slices [floor(s*n/S), floor((s+1)*n/S)).
inline std::pair<long, long> slice_bounds(long n, long subsets, long s) {
  return {s * n / subsets, (s + 1) * n / subsets};
}

// Partition after a seeded within-sample shuffle; block s takes proportional
// slices of Y and Z so every sub-test sees both samples.
inline std::vector<TwoSampleData> partition_blocks(const TwoSampleData& data,
                                                   long subsets,
                                                   std::uint64_t seed) {
  const auto order_y = shuffled_indices(data.n(), seed, 0);
  const auto order_z = shuffled_indices(data.m(), seed, 1);
  std::vector<TwoSampleData> blocks;
  blocks.reserve(subsets);
  for (long s = 0; s < subsets; ++s) {
    const auto [y0, y1] = slice_bounds(data.n(), subsets, s);
    const auto [z0, z1] = slice_bounds(data.m(), subsets, s);
    Eigen::MatrixXd y(y1 - y0, data.y.cols());
    Eigen::MatrixXd z(z1 - z0, data.z.cols());
    for (long i = y0; i < y1; ++i) y.row(i - y0) = data.y.row(order_y[i]);
    for (long i = z0; i < z1; ++i) z.row(i - z0) = data.z.row(order_z[i]);
    blocks.emplace_back(std::move(y), std::move(z));
  }
  return blocks;
}

inline std::vector<PairedData> partition_blocks(const PairedData& data,
                                                long subsets,
                                                std::uint64_t seed) {
  const auto order = shuffled_indices(data.n(), seed, 0);
  std::vector<PairedData> blocks;
  blocks.reserve(subsets);
  for (long s = 0; s < subsets; ++s) {
    const auto [r0, r1] = slice_bounds(data.n(), subsets, s);
    Eigen::MatrixXd y(r1 - r0, data.y.cols());
    Eigen::MatrixXd z(r1 - r0, data.z.cols());
    for (long i = r0; i < r1; ++i) {
      y.row(i - r0) = data.y.row(order[i]);
      z.row(i - r0) = data.z.row(order[i]);
    }
    blocks.emplace_back(std::move(y), std::move(z));
  }
  return blocks;
}

inline long min_sample_rows(const TwoSampleData& data) {
  return std::min(data.n(), data.m());
}

inline long min_sample_rows(const PairedData& data) { return data.n(); }

inline long total_rows(const TwoSampleData& data) {
  return data.n() + data.m();
}

inline long total_rows(const PairedData& data) { return data.n(); }

// Non-private permutation sub-test on one block; returns the exact p-value
// numerator over B+1. Block b gets its own permutation streams.
template <typename BlockData>
long subtest_p_count(const BlockData& block, const StatisticDescriptor& stat,
                     const TestConfig& parent, long block_id) {
  TestConfig sub = parent;
  sub.budget.reset();
  sub.exact_level_randomization = false;
  sub.keep_noisy_values = false;
  const auto prepared = prepare_statistic(stat, block);
  EngineOptions options;
  options.perm_purpose = StreamPurpose::kSubtestPermutation;
  options.stream_block = static_cast<std::uint64_t>(block_id + 1);
  return run_permutation_test(*prepared, sub, options).p_count;
}

// Largest integer threshold t with (p_count <= t) == (p_count/total < alpha),
// i.e. the strict-inequality companion of floor_scaled_level.
inline long strict_level_threshold(double alpha, long total) {
  const long f = floor_scaled_level(alpha, total);
  const long double x =
      static_cast<long double>(alpha) * static_cast<long double>(total);
  const long double guard = 1e-9L * std::max<long double>(1.0L, x);
  const bool integral = std::fabs(static_cast<double>(
                            x - static_cast<long double>(f))) < guard;
  return integral ? f - 1 : f;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// TOT: permutation Test of Tests.

struct TotOptions {
  std::optional<long> subsets;    // default floor(sqrt(total rows))
  std::optional<double> sub_level;  // default min(5 alpha, 0.5)
};

struct TotOutcome {
  TestOutcome outcome;
  long subsets = 0;
  double sub_level = 0.0;
  long rejections = 0;          // a
  double privatized_count = 0;  // z = a + Tulap noise
};

// Runs the non-private permutation sub-test at level alpha0 on each of S
// disjoint blocks, privatizes the rejection count with Tulap(e^{-eps}) noise
// and computes the binomial-mixture p-value
//   p = sum_s C(S,s) alpha0^s (1-alpha0)^{S-s} F_tulap(s - z).
template <typename Data>
TotOutcome tot_test(const Data& data, const StatisticDescriptor& statistic,
                    const TestConfig& config, double epsilon,
                    const TotOptions& tot_options = {}) {
  config.validate();
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("tot_test: epsilon must be positive");
  }
  const long subsets = tot_options.subsets.value_or(static_cast<long>(
      std::floor(std::sqrt(static_cast<double>(detail::total_rows(data))))));
  const long max_subsets =
      detail::min_sample_rows(data) / detail::min_block_rows(statistic.kind);
  if (subsets < 1 || subsets > max_subsets) {
    throw infeasible_error("tot_test: cannot form " + std::to_string(subsets) +
                           " blocks from the given sample");
  }
  const double alpha0 =
      tot_options.sub_level.value_or(std::min(5.0 * config.alpha, 0.5));
  if (!(alpha0 > 0.0 && alpha0 < 1.0)) {
    throw std::invalid_argument("tot_test: sub-test level must be in (0,1)");
  }

  const auto blocks = detail::partition_blocks(data, subsets, config.seed);
  const long strict = detail::strict_level_threshold(
      alpha0, config.num_permutations + 1);
  long rejections = 0;
  for (long s = 0; s < subsets; ++s) {
    const long p_count =
        detail::subtest_p_count(blocks[s], statistic, config, s);
    if (p_count <= strict) ++rejections;  // sub-test rejects: p_hat < alpha0
  }

  const TulapParam tulap = TulapParam::from_epsilon(epsilon);
  RandomStream noise(config.seed, StreamPurpose::kBaselineNoise, 0, 0);
  const double z = static_cast<double>(rejections) + tulap_sample(tulap, noise);

  long double p_value = 0.0L;
  long double pmf = std::pow(1.0L - static_cast<long double>(alpha0),
                             static_cast<long double>(subsets));
  const long double odds = static_cast<long double>(alpha0) /
                           (1.0L - static_cast<long double>(alpha0));
  for (long s = 0; s <= subsets; ++s) {
    p_value += pmf * static_cast<long double>(
                         tulap_cdf(tulap, static_cast<double>(s) - z));
    pmf *= odds * static_cast<long double>(subsets - s) /
           static_cast<long double>(s + 1);
  }

  TotOutcome result;
  result.subsets = subsets;
  result.sub_level = alpha0;
  result.rejections = rejections;
  result.privatized_count = z;
  result.outcome.p_value = static_cast<double>(p_value);
  result.outcome.reject = result.outcome.p_value <= config.alpha;
  result.outcome.noisy_statistic = z;
  result.outcome.noise_scale = tulap.b;
  result.outcome.num_permutations = config.num_permutations;
  result.outcome.seed = config.seed;
  result.outcome.mechanism = Mechanism::kTot;
  return result;
}

// ---------------------------------------------------------------------------
// SARRM: subsampled and aggregated randomized response.

struct SarrmParams {
  long k = 0;          // number of subsets is 2k+1
  double p = 0.0;      // randomized-response retention probability
  double alpha0 = 0.0; // sub-test level
};

namespace detail {

inline long double log_binom_tail_gt(long n, long double q, long k) {
  // log P(Bin(n,q) > k); -inf when the tail is empty.
  if (k >= n) return -std::numeric_limits<long double>::infinity();
  if (k < 0) return 0.0L;
  if (q <= 0.0L) return -std::numeric_limits<long double>::infinity();
  if (q >= 1.0L) return 0.0L;
  long double max_term = -std::numeric_limits<long double>::infinity();
  std::vector<long double> terms;
  terms.reserve(n - k);
  for (long l = k + 1; l <= n; ++l) {
    const long double t =
        std::lgamma(n + 1.0L) - std::lgamma(l + 1.0L) -
        std::lgamma(n - l + 1.0L) +
        static_cast<long double>(l) * std::log(q) +
        static_cast<long double>(n - l) * std::log1p(-q);
    terms.push_back(t);
    max_term = std::max(max_term, t);
  }
  long double sum = 0.0L;
  for (const long double t : terms) sum += std::exp(t - max_term);
  return max_term + std::log(sum);
}

}  // namespace detail

// Null significance level of SARRM:
//   sum_{l=k+1}^{2k+1} C(2k+1,l) q^l (1-q)^{2k+1-l},
// with q = p alpha0 + (1-p)(1-alpha0).
inline double sarrm_level(long k, double p, double alpha0) {
  if (k < 1) throw std::invalid_argument("sarrm_level: k >= 1");
  const long double q = static_cast<long double>(p) * alpha0 +
                        (1.0L - static_cast<long double>(p)) * (1.0L - alpha0);
  return static_cast<double>(
      std::exp(detail::log_binom_tail_gt(2 * k + 1, q, k)));
}

// Exact pure-DP level of SARRM:
//   eps = log( P(B1 > k) / P(B0 > k) ),
// B0 ~ Bin(2k+1, 1-p), B1 ~ Bern(p) + Bin(2k, 1-p). Returns +inf when the
// denominator underflows to zero.
inline double sarrm_dp_epsilon(long k, double p) {
  if (k < 1) throw std::invalid_argument("sarrm_dp_epsilon: k >= 1");
  if (!(p > 0.5 && p < 1.0)) {
    throw std::invalid_argument("sarrm_dp_epsilon: p must lie in (0.5, 1)");
  }
  const long double q = 1.0L - static_cast<long double>(p);
  const long double log_b0 = detail::log_binom_tail_gt(2 * k + 1, q, k);
  const long double t1 = std::log(static_cast<long double>(p)) +
                         detail::log_binom_tail_gt(2 * k, q, k - 1);
  const long double t2 = std::log1p(-static_cast<long double>(p)) +
                         detail::log_binom_tail_gt(2 * k, q, k);
  const long double hi = std::max(t1, t2);
  const long double log_b1 =
      hi + std::log(std::exp(t1 - hi) + std::exp(t2 - hi));
  return static_cast<double>(log_b1 - log_b0);
}

namespace detail {

// Solves sarrm_dp_epsilon(k, .) = eps on (0.5, 1) by bisection;
// sarrm_dp_epsilon is increasing in p from 0 to +inf.
inline double solve_sarrm_p(long k, double epsilon) {
  double lo = 0.5 + 1e-12, hi = 1.0 - 1e-12;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double value = sarrm_dp_epsilon(k, mid);
    if (std::abs(value - epsilon) <= 1e-10) return mid;
    if (value < epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw std::runtime_error("sarrm: bisection for p did not converge");
}

}  // namespace detail

// Parameter search: smallest k <= k_max whose DP-calibrated p admits a
// feasible sub-test level, then alpha0 solving sarrm_level(k,p,alpha0) =
// alpha. Feasibility is monotone in k, so the smallest k is located by
// bisection. Throws infeasible_error when no k <= k_max qualifies.
inline SarrmParams sarrm_params(double alpha, double epsilon,
                                double alpha0_min, long k_max) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(epsilon > 0.0) ||
      !(alpha0_min > 0.0 && alpha0_min < 1.0) || k_max < 1) {
    throw std::invalid_argument("sarrm_params: invalid arguments");
  }
  const auto feasible = [&](long k, double* p_out) {
    const double p = detail::solve_sarrm_p(k, epsilon);
    if (p_out != nullptr) *p_out = p;
    return sarrm_level(k, p, alpha0_min) <= alpha;
  };
  if (!feasible(k_max, nullptr)) {
    throw infeasible_error(
        "sarrm: no k <= " + std::to_string(k_max) +
        " attains level " + std::to_string(alpha) + " at epsilon " +
        std::to_string(epsilon) + "; the test cannot be run");
  }
  long lo = 1, hi = k_max;
  while (lo < hi) {
    const long mid = lo + (hi - lo) / 2;
    if (feasible(mid, nullptr)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  SarrmParams params;
  params.k = lo;
  feasible(lo, &params.p);

  // sarrm_level is increasing in alpha0 (p > 1/2), root-bracketed on
  // [alpha0_min, 1).
  double a_lo = alpha0_min, a_hi = 1.0 - 1e-12;
  if (sarrm_level(params.k, params.p, a_hi) <= alpha) {
    params.alpha0 = a_hi;
    return params;
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (a_lo + a_hi);
    const double level = sarrm_level(params.k, params.p, mid);
    if (std::abs(level - alpha) <= 1e-10) {
      params.alpha0 = mid;
      return params;
    }
    if (level < alpha) {
      a_lo = mid;
    } else {
      a_hi = mid;
    }
  }
  throw std::runtime_error("sarrm: bisection for alpha0 did not converge");
}

struct SarrmOutcome {
  TestOutcome outcome;
  SarrmParams params;
  long votes = 0;  // T = sum of randomized sub-test responses
  double effective_sub_level = 0.0;
};

// SARRM test: 2k+1 blocks, sub-test indicators t_s = 1[p_s <= alpha0],
// randomized responses flipped with probability 1-p, reject iff their sum
// exceeds k. Precomputed parameters can be supplied to skip the search.
template <typename Data>
SarrmOutcome sarrm_test(const Data& data, const StatisticDescriptor& statistic,
                        const TestConfig& config, double epsilon,
                        const SarrmParams* precomputed = nullptr,
                        double alpha0_min = 0.0025) {
  config.validate();
  const long min_rows = detail::min_sample_rows(data);
  const long per_block = detail::min_block_rows(statistic.kind);
  const long max_subsets = min_rows / per_block;
  const long k_max = (max_subsets - 1) / 2;
  if (k_max < 1) {
    throw infeasible_error("sarrm: sample too small for any partition");
  }
  const SarrmParams params =
      precomputed != nullptr
          ? *precomputed
          : sarrm_params(config.alpha, epsilon, alpha0_min, k_max);
  if (2 * params.k + 1 > max_subsets) {
    throw infeasible_error("sarrm: required 2k+1 blocks exceed the sample");
  }

  const long subsets = 2 * params.k + 1;
  const auto blocks = detail::partition_blocks(data, subsets, config.seed);
  const long threshold =
      floor_scaled_level(params.alpha0, config.num_permutations + 1);
  RandomStream response(config.seed, StreamPurpose::kBaselineNoise, 0, 0);
  long votes = 0;
  for (long s = 0; s < subsets; ++s) {
    const long p_count =
        detail::subtest_p_count(blocks[s], statistic, config, s);
    const bool t = p_count <= threshold;  // p_hat <= alpha0
    const bool keep = response.uniform01() <= params.p;
    votes += (keep == t) ? 1 : 0;
  }

  SarrmOutcome result;
  result.params = params;
  result.votes = votes;
  result.effective_sub_level =
      static_cast<double>(threshold) /
      static_cast<double>(config.num_permutations + 1);
  result.outcome.p_value = std::numeric_limits<double>::quiet_NaN();
  result.outcome.reject = votes > params.k;
  result.outcome.noisy_statistic = static_cast<double>(votes);
  result.outcome.num_permutations = config.num_permutations;
  result.outcome.seed = config.seed;
  result.outcome.mechanism = Mechanism::kSarrm;
  return result;
}

}  // namespace dpperm

#endif  // DPPERM_BASELINES_HPP_
