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

#ifndef DPPERM_CORE_HPP_
#define DPPERM_CORE_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "dpperm/random.hpp"

namespace dpperm {

// An (epsilon, delta) privacy budget. The Laplace mechanism calibrated with
// the effective scale xi = epsilon + log(1/(1-delta)) is (epsilon, delta)-DP;
// delta = 0 recovers the pure-DP calibration xi = epsilon.
struct PrivacyBudget {
  double epsilon;
  double delta;

  PrivacyBudget(double eps, double del = 0.0) : epsilon(eps), delta(del) {
    if (!(epsilon > 0.0)) {
      throw std::invalid_argument("PrivacyBudget: epsilon must be positive");
    }
    if (!(delta >= 0.0 && delta < 1.0)) {
      throw std::invalid_argument("PrivacyBudget: delta must lie in [0,1)");
    }
  }
};

// Effective noise-calibration scale xi = epsilon + log(1/(1-delta)).
inline double xi_of(const PrivacyBudget& budget) {
  return budget.epsilon + std::log(1.0 / (1.0 - budget.delta));
}

// Smallest number of permutations guaranteeing uniform power beta at level
// alpha: ceil(6 * alpha^-1 * log(2/beta)).
inline long min_permutations(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0)) {
    throw std::domain_error("min_permutations: alpha, beta must be in (0,1)");
  }
  return static_cast<long>(std::ceil(6.0 / alpha * std::log(2.0 / beta)));
}

struct TestConfig {
  double alpha = 0.05;
  long num_permutations = 500;  // B
  std::uint64_t seed = 0;
  std::optional<PrivacyBudget> budget;  // absent => non-private, zero noise
  bool exact_level_randomization = false;
  bool keep_noisy_values = false;  // retain {M_i} in the outcome (debug)

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw std::invalid_argument("TestConfig: alpha must be in (0,1)");
    }
    if (num_permutations < 1) {
      throw std::invalid_argument("TestConfig: num_permutations must be >= 1");
    }
  }

  // The permutation p-value is at least 1/(B+1), so any rejection needs
  // B > 1/alpha - 1. Returns a diagnostic if that fails.
  std::optional<std::string> warning() const {
    if (static_cast<double>(num_permutations) <= 1.0 / alpha - 1.0) {
      return "num_permutations B = " + std::to_string(num_permutations) +
             " <= 1/alpha - 1; the test can never reject";
    }
    return std::nullopt;
  }
};

}  // namespace dpperm

#endif  // DPPERM_CORE_HPP_
