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

#ifndef DPPERM_DP_PERM_HPP_
#define DPPERM_DP_PERM_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "dpperm/core.hpp"
#include "dpperm/statistics.hpp"

namespace dpperm {

enum class Mechanism { kRefined, kNaive, kNonprivate, kTot, kSarrm };

inline const char* mechanism_name(Mechanism m) {
  switch (m) {
    case Mechanism::kRefined: return "refined";
    case Mechanism::kNaive: return "naive";
    case Mechanism::kNonprivate: return "nonprivate";
    case Mechanism::kTot: return "tot";
    case Mechanism::kSarrm: return "sarrm";
  }
  return "unknown";
}

// floor(alpha * count) with a knife-edge guard: products such as 0.05 * 100
// carry one-ulp rounding error, which must not move the rejection lattice.
inline long floor_scaled_level(double alpha, long count) {
  const long double x =
      static_cast<long double>(alpha) * static_cast<long double>(count);
  long f = static_cast<long>(std::floor(x));
  const long double guard = 1e-9L * std::max<long double>(1.0L, x);
  if (static_cast<long double>(f) + 1.0L - x < guard) ++f;
  return std::min(f, count);
}

struct TestOutcome {
  double p_value = 1.0;  // (1 + #{M_i >= M_0}) / (B+1); NaN when undefined
  long p_count = 0;      // exact numerator of the p-value over B+1
  bool reject = false;
  std::optional<bool> reject_randomized;  // set when exact-level mode is on
  double noisy_statistic = 0.0;           // M_0
  double noise_scale = 0.0;
  long num_permutations = 0;
  std::uint64_t seed = 0;
  Mechanism mechanism = Mechanism::kNonprivate;
  std::optional<std::vector<double>> noisy_values;  // {M_i}, debug only
};

// Quantile form of the rejection rule: reject iff M_0 exceeds the
// ceil((1-alpha)(B+1))-th order statistic of all B+1 noisy values.
// values[0] must hold M_0.
inline bool quantile_form_decision(std::span<const double> values,
                                   double alpha) {
  const long total = static_cast<long>(values.size());
  if (total < 1) throw std::invalid_argument("quantile_form_decision: empty");
  const long k_rej = floor_scaled_level(alpha, total);
  const long order_index = total - k_rej;  // = ceil((1-alpha)(B+1))
  if (order_index < 1) return true;        // alpha >= 1: threshold below all
  std::vector<double> sorted(values.begin(), values.end());
  std::nth_element(sorted.begin(), sorted.begin() + (order_index - 1),
                   sorted.end());
  return values[0] > sorted[order_index - 1];
}

// Auxiliary randomization lifting the type I error from floor((B+1)a)/(B+1)
// to exactly alpha: a non-rejected outcome additionally rejects with
// probability (alpha - gamma) / (1 - gamma).
inline bool randomize_exact_level(const TestOutcome& outcome,
                                  const TestConfig& config,
                                  RandomStream& stream) {
  if (outcome.reject) return true;
  const double gamma =
      static_cast<double>(
          floor_scaled_level(config.alpha, outcome.num_permutations + 1)) /
      static_cast<double>(outcome.num_permutations + 1);
  const double aux = (config.alpha - gamma) / (1.0 - gamma);
  return stream.uniform01() <= aux;
}

namespace detail {

// Per-statistic Laplace scale of the naive (composition-based) mechanism:
// each of the B+1 released values gets an (eps/(B+1), delta/(B+1)) share.
inline double naive_noise_scale(double sensitivity, const PrivacyBudget& b,
                                long num_permutations) {
  const double share = static_cast<double>(num_permutations + 1);
  return sensitivity /
         (b.epsilon / share + std::log(1.0 / (1.0 - b.delta / share)));
}

inline double refined_noise_scale(double sensitivity,
                                  const PrivacyBudget& b) {
  return 2.0 * sensitivity / xi_of(b);
}

struct EngineOptions {
  Mechanism mechanism = Mechanism::kRefined;
  int threads = 1;
  // Stream addressing. Sub-tests of the subsample baselines run under their
  // own block id so that blocks draw independent permutations.
  StreamPurpose perm_purpose = StreamPurpose::kPermutation;
  std::uint64_t stream_block = 0;
  // When set, these permutations replace the random ones (pi_0 stays the
  // identity); used by the exhaustive-enumeration oracle checks.
  std::span<const std::vector<std::int32_t>> explicit_permutations = {};
};

inline TestOutcome run_permutation_test(const PreparedStatistic& statistic,
                                        const TestConfig& config,
                                        const EngineOptions& options) {
  config.validate();
  const bool explicit_mode = !options.explicit_permutations.empty();
  const long num_perms =
      explicit_mode
          ? static_cast<long>(options.explicit_permutations.size())
          : config.num_permutations;

  double scale = 0.0;
  Mechanism mechanism = Mechanism::kNonprivate;
  if (config.budget.has_value()) {
    const double delta_t = statistic.sensitivity();
    if (!(delta_t > 0.0)) {
      throw std::invalid_argument(
          "dp test: privacy budget requires a positive sensitivity");
    }
    mechanism = options.mechanism;
    scale = mechanism == Mechanism::kNaive
                ? naive_noise_scale(delta_t, *config.budget, num_perms)
                : refined_noise_scale(delta_t, *config.budget);
  }

  const long size = statistic.permutation_size();
  const std::uint64_t block = options.stream_block;
  std::vector<double> noisy(num_perms + 1);
  {
    RandomStream noise(config.seed, StreamPurpose::kNoise, block, 0);
    noisy[0] = statistic.evaluate(identity_permutation(size)) +
               scale * laplace_sample(noise);
  }

  const auto evaluate_range = [&](long begin, long end) {
    for (long i = begin; i < end; ++i) {
      std::vector<std::int32_t> perm;
      if (explicit_mode) {
        perm = options.explicit_permutations[i - 1];
      } else {
        RandomStream perm_stream(config.seed, options.perm_purpose, block,
                                 static_cast<std::uint64_t>(i));
        perm = random_permutation(size, perm_stream);
      }
      RandomStream noise(config.seed, StreamPurpose::kNoise, block,
                         static_cast<std::uint64_t>(i));
      noisy[i] = statistic.evaluate(perm) + scale * laplace_sample(noise);
    }
  };

  const int threads = std::max(1, options.threads);
  if (threads == 1 || num_perms < 2 * threads) {
    evaluate_range(1, num_perms + 1);
  } else {
    std::vector<std::thread> workers;
    const long chunk = (num_perms + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const long begin = 1 + t * chunk;
      const long end = std::min(num_perms + 1, begin + chunk);
      if (begin >= end) break;
      workers.emplace_back(evaluate_range, begin, end);
    }
    for (auto& w : workers) w.join();
  }

  long count = 0;
  for (long i = 1; i <= num_perms; ++i) {
    if (noisy[i] >= noisy[0]) ++count;
  }

  TestOutcome outcome;
  outcome.p_count = count + 1;
  outcome.p_value = static_cast<double>(outcome.p_count) /
                    static_cast<double>(num_perms + 1);
  outcome.reject = outcome.p_count <= floor_scaled_level(config.alpha,
                                                         num_perms + 1);
  outcome.noisy_statistic = noisy[0];
  outcome.noise_scale = scale;
  outcome.num_permutations = num_perms;
  outcome.seed = config.seed;
  outcome.mechanism = mechanism;
  if (config.keep_noisy_values) outcome.noisy_values = noisy;
  if (config.exact_level_randomization) {
    RandomStream aux(config.seed, StreamPurpose::kLevelRandomization, 0, 0);
    outcome.reject_randomized = randomize_exact_level(outcome, config, aux);
  }
  return outcome;
}

}  // namespace detail

// Differentially private permutation test: draws B uniform permutations and
// B+1 Laplace variates from the seeded streams, releases
// M_i = T(X^{pi_i}) + (2 Delta_T / xi) zeta_i with pi_0 the identity, and
// rejects when p = (1 + #{M_i >= M_0}) / (B+1) <= alpha. Without a budget the
// noise scale is zero and this is the classical Monte Carlo permutation test.
template <typename Data>
TestOutcome dp_permutation_test(const Data& data,
                                const StatisticDescriptor& statistic,
                                const TestConfig& config, int threads = 1) {
  const auto prepared = prepare_statistic(statistic, data);
  detail::EngineOptions options;
  options.mechanism = Mechanism::kRefined;
  options.threads = threads;
  return detail::run_permutation_test(*prepared, config, options);
}

// Naive composition variant: identical pipeline, but every released value is
// individually privatized, so the per-statistic noise scale is
// Delta_T / (eps/(B+1) + log(1/(1 - delta/(B+1)))), growing linearly in B.
template <typename Data>
TestOutcome naive_dp_permutation_test(const Data& data,
                                      const StatisticDescriptor& statistic,
                                      const TestConfig& config,
                                      int threads = 1) {
  if (!config.budget.has_value()) {
    throw std::invalid_argument(
        "naive_dp_permutation_test: requires a privacy budget");
  }
  const auto prepared = prepare_statistic(statistic, data);
  detail::EngineOptions options;
  options.mechanism = Mechanism::kNaive;
  options.threads = threads;
  return detail::run_permutation_test(*prepared, config, options);
}

// Runs the engine against an explicit permutation list (pi_0 remains the
// identity). With a zero noise scale and the list enumerating every
// non-identity arrangement this reproduces the exhaustive permutation test.
template <typename Data>
TestOutcome permutation_test_with(
    const Data& data, const StatisticDescriptor& statistic,
    const TestConfig& config,
    std::span<const std::vector<std::int32_t>> permutations) {
  const auto prepared = prepare_statistic(statistic, data);
  detail::EngineOptions options;
  options.explicit_permutations = permutations;
  return detail::run_permutation_test(*prepared, config, options);
}

}  // namespace dpperm

#endif  // DPPERM_DP_PERM_HPP_
