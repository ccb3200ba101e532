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

#include "dpperm/random.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

namespace dpperm {
namespace {

TEST(RandomStream, SameSeedAndStreamReproduce) {
  RandomStream a(42, 7);
  RandomStream b(42, 7);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(a.next_u64(), b.next_u64());
  }
}

TEST(RandomStream, DistinctStreamsDiffer) {
  RandomStream a(42, 7);
  RandomStream b(42, 8);
  RandomStream c(43, 7);
  int equal_ab = 0, equal_ac = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t x = a.next_u64();
    equal_ab += (x == b.next_u64());
    equal_ac += (x == c.next_u64());
  }
  EXPECT_EQ(equal_ab, 0);
  EXPECT_EQ(equal_ac, 0);
}

TEST(RandomStream, StreamIndexPacking) {
  const auto index = make_stream_index(StreamPurpose::kNoise, 3, 17);
  EXPECT_EQ(index, (std::uint64_t{2} << 56) | (std::uint64_t{3} << 40) | 17);
  std::set<std::uint64_t> seen;
  for (const auto purpose : {StreamPurpose::kPermutation,
                             StreamPurpose::kNoise, StreamPurpose::kData}) {
    for (std::uint64_t block = 0; block < 4; ++block) {
      for (std::uint64_t draw = 0; draw < 4; ++draw) {
        seen.insert(make_stream_index(purpose, block, draw));
      }
    }
  }
  EXPECT_EQ(seen.size(), 3u * 4u * 4u);
}

TEST(RandomStream, Uniform01OpenInterval) {
  RandomStream stream(1, 1);
  for (int i = 0; i < 100000; ++i) {
    const double u = stream.uniform01();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(RandomStream, UniformBelowIsInRangeAndRoughlyUniform) {
  RandomStream stream(3, 9);
  std::map<std::uint64_t, long> counts;
  const long draws = 60000;
  for (long i = 0; i < draws; ++i) ++counts[stream.uniform_below(6)];
  ASSERT_EQ(counts.size(), 6u);
  for (const auto& [value, count] : counts) {
    ASSERT_LT(value, 6u);
    EXPECT_NEAR(static_cast<double>(count) / draws, 1.0 / 6.0, 0.01);
  }
}

TEST(LaplaceQuantile, MatchesClosedFormPoints) {
  EXPECT_DOUBLE_EQ(laplace_quantile(0.5), 0.0);
  EXPECT_NEAR(laplace_quantile(0.75), std::log(2.0), 1e-15);
  EXPECT_NEAR(laplace_quantile(0.25), -std::log(2.0), 1e-15);
}

TEST(LaplaceSample, MomentsMatchStandardLaplace) {
  RandomStream stream(2026, 0);
  const long n = 1000000;
  double sum = 0.0, sum_sq = 0.0;
  for (long i = 0; i < n; ++i) {
    const double x = laplace_sample(stream);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(var, 2.0, 0.05);
}

TEST(GeometricSample, MatchesGeometricLaw) {
  const double b = 0.5;
  RandomStream stream(5, 5);
  const long n = 100000;
  long zeros = 0;
  double sum = 0.0;
  for (long i = 0; i < n; ++i) {
    const auto g = geometric_sample(b, stream);
    ASSERT_GE(g, 0);
    zeros += (g == 0);
    sum += static_cast<double>(g);
  }
  EXPECT_NEAR(static_cast<double>(zeros) / n, 1.0 - b, 0.006);
  EXPECT_NEAR(sum / n, b / (1.0 - b), 0.02);
}

TEST(RandomPermutation, ValidAndApproximatelyUniform) {
  RandomStream stream(11, 0);
  std::map<std::vector<std::int32_t>, long> counts;
  const long draws = 18000;
  for (long i = 0; i < draws; ++i) {
    auto perm = random_permutation(3, stream);
    auto sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    ASSERT_EQ(sorted, (std::vector<std::int32_t>{0, 1, 2}));
    ++counts[perm];
  }
  ASSERT_EQ(counts.size(), 6u);
  for (const auto& [perm, count] : counts) {
    EXPECT_NEAR(static_cast<double>(count) / draws, 1.0 / 6.0, 0.015);
  }
}

TEST(DeriveSeed, SpreadsContexts) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t cell = 0; cell < 100; ++cell) {
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
      seen.insert(derive_seed(derive_seed(1234, cell), rep));
    }
  }
  EXPECT_EQ(seen.size(), 10000u);
}

TEST(RandomStream, AdjacentStreamsUncorrelated) {
  RandomStream a(99, 1000);
  RandomStream b(99, 1001);
  const long n = 100000;
  double sum_ab = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (long i = 0; i < n; ++i) {
    const double x = a.uniform01(), y = b.uniform01();
    sum_ab += x * y;
    sum_a += x;
    sum_b += y;
  }
  const double cov = sum_ab / n - (sum_a / n) * (sum_b / n);
  EXPECT_NEAR(cov * 12.0, 0.0, 0.02);
}

}  // namespace
}  // namespace dpperm
