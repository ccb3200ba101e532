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

#include "dpperm/statistics.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "dpperm/random.hpp"
#include "dpperm/synthetic.hpp"
#include "test_support.hpp"

namespace dpperm {
namespace {

using dpperm_test::brute_hsic_u;
using dpperm_test::brute_hsic_v;
using dpperm_test::brute_mmd_u;
using dpperm_test::brute_mmd_v;
using dpperm_test::uniform_matrix;

TwoSampleData random_two_sample(long n, long m, long d,
                                RandomStream& stream) {
  return TwoSampleData(uniform_matrix(n, d, stream),
                       uniform_matrix(m, d, stream));
}

PairedData random_paired(long n, long d_y, long d_z, RandomStream& stream) {
  return PairedData(uniform_matrix(n, d_y, stream),
                    uniform_matrix(n, d_z, stream));
}

TEST(MmdV, IdenticalSamplesGiveZero) {
  Eigen::MatrixXd y(3, 1);
  y << 0.1, 0.5, 0.9;
  const TwoSampleData data(y, y);
  const auto kernel = KernelSpec::gaussian(1.0, 1);
  const auto g = gram(kernel, data.pooled());
  EXPECT_NEAR(mmd_v(g, 3, 3, identity_permutation(6)), 0.0, 1e-12);
}

TEST(MmdV, SingletonSamplesClosedForm) {
  Eigen::MatrixXd y(1, 1), z(1, 1);
  y << 0.0;
  z << 1.0;
  const TwoSampleData data(y, z);
  const auto g = gram(KernelSpec::gaussian(1.0, 1), data.pooled());
  // sqrt(1 + 1 - 2 e^{-1})
  EXPECT_NEAR(mmd_v(g, 1, 1, identity_permutation(2)),
              std::sqrt(2.0 * (1.0 - std::exp(-1.0))), 1e-14);
}

TEST(MmdV, MatchesDefinitionalThreeSum) {
  RandomStream stream(21, 0);
  const auto kernel = KernelSpec::gaussian(0.7, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto data = random_two_sample(5, 7, 2, stream);
    const auto pooled = data.pooled();
    const auto g = gram(kernel, pooled);
    RandomStream pstream(trial, 1);
    const auto perm = random_permutation(12, pstream);
    EXPECT_NEAR(mmd_v(g, 5, 7, perm),
                brute_mmd_v(kernel, pooled, 5, 7, perm), 1e-12);
  }
}

TEST(MmdU, MatchesBruteForceAndLowerBound) {
  RandomStream stream(22, 0);
  const auto kernel = KernelSpec::gaussian(1.0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto data = random_two_sample(4, 4, 1, stream);
    const auto pooled = data.pooled();
    const auto g = gram(kernel, pooled);
    RandomStream pstream(trial, 2);
    const auto perm = random_permutation(8, pstream);
    const double u = mmd_u(g, 4, 4, perm);
    EXPECT_NEAR(u, brute_mmd_u(kernel, pooled, 4, 4, perm), 1e-12);
    EXPECT_GE(u, -1.0 / 4 - 1.0 / 4 - 1e-12);  // U >= -K/n - K/m
  }
}

TEST(MmdU, AllPointsIdenticalGivesZero) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Constant(2, 1, 0.3);
  const TwoSampleData data(y, y);
  const auto g = gram(KernelSpec::gaussian(1.0, 1), data.pooled());
  EXPECT_NEAR(mmd_u(g, 2, 2, identity_permutation(4)), 0.0, 1e-14);
}

TEST(MmdU, RejectsTooSmallSamples) {
  Eigen::MatrixXd y(1, 1), z(2, 1);
  y << 0.0;
  z << 0.5, 1.0;
  const auto g = gram(KernelSpec::gaussian(1.0, 1),
                      TwoSampleData(y, z).pooled());
  EXPECT_THROW(mmd_u(g, 1, 2, identity_permutation(3)),
               std::invalid_argument);
}

TEST(VuGapMmd, MatchesDifferenceOfStatistics) {
  RandomStream stream(23, 0);
  const auto kernel = KernelSpec::gaussian(0.5, 1);
  for (long n = 3; n <= 5; ++n) {
    const auto data = random_two_sample(n, n, 1, stream);
    const auto g = gram(kernel, data.pooled());
    const auto id = identity_permutation(2 * n);
    const double v = mmd_v(g, n, n, id);
    const double u = mmd_u(g, n, n, id);
    const double gap = v_u_gap_mmd(g, n, n);
    EXPECT_NEAR(v * v - u, gap, 1e-12);
    EXPECT_LE(gap, (1.0 / n + 1.0 / n) * 1.0 + 1e-12);
  }
}

TEST(VuGapMmd, UndefinedForSingletons) {
  Eigen::MatrixXd y(1, 1), z(1, 1);
  y << 0.0;
  z << 1.0;
  const auto g = gram(KernelSpec::gaussian(1.0, 1),
                      TwoSampleData(y, z).pooled());
  EXPECT_THROW(v_u_gap_mmd(g, 1, 1), std::invalid_argument);
}

TEST(HsicV, ConstantBlockGivesZero) {
  RandomStream stream(24, 0);
  const auto ky = KernelSpec::gaussian(1.0, 1);
  const auto kz = KernelSpec::gaussian(1.0, 1);
  const auto y = uniform_matrix(6, 1, stream);
  const Eigen::MatrixXd z = Eigen::MatrixXd::Constant(6, 1, 0.4);
  // constant Z: the three terms cancel
  EXPECT_NEAR(hsic_v(gram(ky, y), gram(kz, z), identity_permutation(6)), 0.0,
              1e-7);
  // constant Y: symmetric cancellation
  EXPECT_NEAR(hsic_v(gram(ky, z), gram(kz, y), identity_permutation(6)), 0.0,
              1e-7);
}

TEST(HsicV, MatchesQuadrupleLoop) {
  RandomStream stream(25, 0);
  const auto ky = KernelSpec::gaussian(0.8, 1);
  const auto kz = KernelSpec::laplacian(1.2, 2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto data = random_paired(4, 1, 2, stream);
    RandomStream pstream(trial, 3);
    const auto perm = random_permutation(4, pstream);
    EXPECT_NEAR(hsic_v(gram(ky, data.y), gram(kz, data.z), perm),
                brute_hsic_v(ky, kz, data, perm), 1e-10);
  }
}

TEST(HsicU, MatchesTupleEnumeration) {
  RandomStream stream(26, 0);
  const auto ky = KernelSpec::gaussian(0.8, 1);
  const auto kz = KernelSpec::gaussian(1.5, 1);
  for (long n = 4; n <= 7; ++n) {
    const auto data = random_paired(n, 1, 1, stream);
    RandomStream pstream(n, 4);
    const auto perm = random_permutation(n, pstream);
    EXPECT_NEAR(hsic_u(gram(ky, data.y), gram(kz, data.z), perm),
                brute_hsic_u(ky, kz, data, perm), 1e-10);
  }
}

TEST(HsicU, ConstantZGivesZero) {
  RandomStream stream(27, 0);
  const auto ky = KernelSpec::gaussian(0.8, 1);
  const auto kz = KernelSpec::gaussian(1.0, 1);
  const auto y = uniform_matrix(5, 1, stream);
  const Eigen::MatrixXd z = Eigen::MatrixXd::Constant(5, 1, 0.2);
  const PairedData data(y, z);
  const auto id = identity_permutation(5);
  EXPECT_NEAR(hsic_u(gram(ky, y), gram(kz, z), id), 0.0, 1e-13);
  EXPECT_NEAR(brute_hsic_u(ky, kz, data, id), 0.0, 1e-13);
}

TEST(HsicU, RejectsTooSmallSamples) {
  RandomStream stream(28, 0);
  const auto data = random_paired(3, 1, 1, stream);
  const auto k = KernelSpec::gaussian(1.0, 1);
  EXPECT_THROW(
      hsic_u(gram(k, data.y), gram(k, data.z), identity_permutation(3)),
      std::invalid_argument);
}

TEST(HsicVuGap, MatchesDifferenceDecomposition) {
  RandomStream stream(29, 0);
  const auto ky = KernelSpec::gaussian(0.6, 1);
  const auto kz = KernelSpec::gaussian(1.1, 1);
  for (long n = 4; n <= 8; ++n) {
    const auto data = random_paired(n, 1, 1, stream);
    const auto gy = gram(ky, data.y);
    const auto gz = gram(kz, data.z);
    const auto id = identity_permutation(n);
    const double v = hsic_v(gy, gz, id);
    const double u = hsic_u(gy, gz, id);
    EXPECT_NEAR(v * v - u, hsic_v_u_gap(gy, gz), 1e-12);
  }
}

TEST(MeanDiff, KnownValues) {
  Eigen::MatrixXd y(1, 2), z(1, 2);
  y << 0.0, 0.0;
  z << 3.0, 4.0;
  const auto pooled = TwoSampleData(y, z).pooled();
  const auto id = identity_permutation(2);
  EXPECT_DOUBLE_EQ(mean_diff(pooled, 1, 1, 2.0, id), 5.0);
  EXPECT_DOUBLE_EQ(
      mean_diff(pooled, 1, 1, std::numeric_limits<double>::infinity(), id),
      4.0);
  EXPECT_DOUBLE_EQ(mean_diff(pooled, 1, 1, 1.0, id), 7.0);

  const auto same = TwoSampleData(y, y).pooled();
  EXPECT_DOUBLE_EQ(mean_diff(same, 1, 1, 2.0, id), 0.0);
  EXPECT_THROW(mean_diff(pooled, 1, 1, 0.5, id), std::invalid_argument);
}

TEST(Sensitivity, ClosedFormConstants) {
  EXPECT_NEAR(sensitivity(StatisticKind::kMmdV, 1.0, 0.0, 100, 100),
              std::sqrt(2.0) / 100.0, 1e-15);
  EXPECT_NEAR(sensitivity(StatisticKind::kHsicV, 1.0, 1.0, 100, 100),
              4.0 * 99.0 / 10000.0, 1e-15);
  EXPECT_NEAR(sensitivity(StatisticKind::kMmdU, 1.0, 0.0, 50, 50), 0.16,
              1e-15);
  EXPECT_NEAR(sensitivity(StatisticKind::kHsicU, 1.0, 1.0, 100, 100),
              24.0 / 100.0, 1e-15);
  EXPECT_NEAR(
      sensitivity(StatisticKind::kMeanDiff, 0.0, 0.0, 10, 20, 2.5),
      0.25, 1e-15);
  EXPECT_THROW(sensitivity(StatisticKind::kMmdU, 1.0, 0.0, 1, 5),
               std::invalid_argument);
  EXPECT_THROW(sensitivity(StatisticKind::kHsicU, 1.0, 1.0, 3, 3),
               std::invalid_argument);
  EXPECT_THROW(sensitivity(StatisticKind::kMeanDiff, 0.0, 0.0, 5, 5, 0.0),
               std::invalid_argument);
}

// evaluate(data, pi) must equal evaluate(pi-permuted data, identity).
TEST(PermutationConsistency, AllStatisticKinds) {
  RandomStream stream(30, 0);
  const auto kernel = KernelSpec::gaussian(0.9, 2);
  for (int trial = 0; trial < 100; ++trial) {
    const long n = 4 + static_cast<long>(stream.uniform_below(3));
    const long m = 4 + static_cast<long>(stream.uniform_below(3));
    const auto data = random_two_sample(n, m, 2, stream);
    const auto pooled = data.pooled();
    RandomStream pstream(trial, 5);
    const auto perm = random_permutation(n + m, pstream);
    const auto shuffled = dpperm_test::permuted_rows(pooled, perm);
    const auto id = identity_permutation(n + m);

    const auto g = gram(kernel, pooled);
    const auto g_shuffled = gram(kernel, shuffled);
    ASSERT_NEAR(mmd_v(g, n, m, perm), mmd_v(g_shuffled, n, m, id), 1e-12);
    ASSERT_NEAR(mmd_u(g, n, m, perm), mmd_u(g_shuffled, n, m, id), 1e-12);
    ASSERT_NEAR(mean_diff(pooled, n, m, 2.0, perm),
                mean_diff(shuffled, n, m, 2.0, id), 1e-12);

    const auto paired = random_paired(n, 2, 2, stream);
    RandomStream zstream(trial, 6);
    const auto perm_z = random_permutation(n, zstream);
    const auto z_shuffled = dpperm_test::permuted_rows(paired.z, perm_z);
    const auto gy = gram(kernel, paired.y);
    ASSERT_NEAR(hsic_v(gy, gram(kernel, paired.z), perm_z),
                hsic_v(gy, gram(kernel, z_shuffled), identity_permutation(n)),
                1e-12);
    ASSERT_NEAR(hsic_u(gy, gram(kernel, paired.z), perm_z),
                hsic_u(gy, gram(kernel, z_shuffled), identity_permutation(n)),
                1e-12);
  }
}

// Random neighboring pairs never exceed the closed-form sensitivity.
TEST(SensitivityBound, RandomNeighborsRespectDelta) {
  RandomStream stream(31, 0);
  const auto kernel = KernelSpec::gaussian(1.0, 1);
  const long n = 6, m = 6;
  const double delta_mmd = sensitivity(StatisticKind::kMmdV, 1.0, 0.0, n, m);
  const double delta_hsic = sensitivity(StatisticKind::kHsicV, 1.0, 1.0, n, n);
  const double delta_mean =
      sensitivity(StatisticKind::kMeanDiff, 0.0, 0.0, n, m, 1.0);
  for (int pair = 0; pair < 2000; ++pair) {
    const auto data = random_two_sample(n, m, 1, stream);
    auto pooled = data.pooled();
    auto neighbor = pooled;
    const long row = static_cast<long>(stream.uniform_below(n + m));
    neighbor(row, 0) = stream.uniform01();
    const auto g = gram(kernel, pooled);
    const auto gn = gram(kernel, neighbor);

    auto paired = random_paired(n, 1, 1, stream);
    auto paired_neighbor = paired;
    const long prow = static_cast<long>(stream.uniform_below(n));
    paired_neighbor.y(prow, 0) = stream.uniform01();
    paired_neighbor.z(prow, 0) = stream.uniform01();
    const auto gy = gram(kernel, paired.y);
    const auto gz = gram(kernel, paired.z);
    const auto gyn = gram(kernel, paired_neighbor.y);
    const auto gzn = gram(kernel, paired_neighbor.z);

    RandomStream pstream(pair, 7);
    for (int rep = 0; rep < 10; ++rep) {
      const auto perm = random_permutation(n + m, pstream);
      ASSERT_LE(std::abs(mmd_v(g, n, m, perm) - mmd_v(gn, n, m, perm)),
                delta_mmd + 1e-12);
      ASSERT_LE(std::abs(mean_diff(pooled, n, m, 2.0, perm) -
                         mean_diff(neighbor, n, m, 2.0, perm)),
                delta_mean + 1e-12);
      const auto perm_z = random_permutation(n, pstream);
      ASSERT_LE(std::abs(hsic_v(gy, gz, perm_z) - hsic_v(gyn, gzn, perm_z)),
                delta_hsic + 1e-12);
    }
  }
}

// The all-equal-but-one construction attains the MMD sensitivity bound as the
// replaced point moves far away under the Gaussian kernel.
TEST(SensitivityTightness, MmdAdversarialConstruction) {
  const auto kernel = KernelSpec::gaussian(1.0, 1);
  for (const long n : {3L, 5L, 10L}) {
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, 1);
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, 1);
    const TwoSampleData base(y, z);
    Eigen::MatrixXd y_far = y;
    y_far(0, 0) = 1e6;
    const TwoSampleData moved(y_far, z);
    const auto id = identity_permutation(2 * n);
    const double diff =
        std::abs(mmd_v(gram(kernel, base.pooled()), n, n, id) -
                 mmd_v(gram(kernel, moved.pooled()), n, n, id));
    EXPECT_GE(diff, 0.99 * std::sqrt(2.0) / static_cast<double>(n));
    EXPECT_LE(diff, std::sqrt(2.0) / static_cast<double>(n) + 1e-12);
  }
}

// The two-row construction with the transposition permutation attains the
// HSIC sensitivity lower bound 4(n-2.5)/n^2 sqrt(KL).
TEST(SensitivityTightness, HsicAdversarialConstruction) {
  const auto kernel = KernelSpec::gaussian(1.0, 1);
  const long n = 6;
  Eigen::MatrixXd y(n, 1), z(n, 1);
  for (long i = 0; i < n; ++i) {
    y(i, 0) = i < 2 ? 0.0 : 1e6;
    z(i, 0) = i < 2 ? 0.0 : 1e6;
  }
  Eigen::MatrixXd y_tilde = y, z_tilde = z;
  y_tilde(1, 0) = 1e6;
  z_tilde(1, 0) = 1e6;
  auto transposition = identity_permutation(n);
  std::swap(transposition[0], transposition[1]);
  const double diff = std::abs(
      hsic_v(gram(kernel, y), gram(kernel, z), transposition) -
      hsic_v(gram(kernel, y_tilde), gram(kernel, z_tilde), transposition));
  const double target = 4.0 * (n - 2.5) / static_cast<double>(n * n);
  EXPECT_GE(diff, 0.99 * target);
  EXPECT_LE(diff, sensitivity(StatisticKind::kHsicV, 1.0, 1.0, n, n) + 1e-12);
}

// Monte Carlo unbiasedness: the U-statistic mean approaches the squared
// population MMD of the two-point pair.
TEST(MmdU, UnbiasedForSquaredPopulationMmd) {
  const auto kernel = KernelSpec::gaussian(1.0, 1);
  Eigen::VectorXd x(1), v(1);
  x << 0.0;
  v << 1.0;
  const TwoPointSpec spec(x, v, 0.8, 0.3);
  const double target = two_point_mmd(spec, kernel);
  const long n = 20, reps = 5000;
  double sum = 0.0, sum_sq = 0.0;
  for (long rep = 0; rep < reps; ++rep) {
    RandomStream sy(rep, StreamPurpose::kData, 0, 0);
    RandomStream sz(rep, StreamPurpose::kData, 1, 0);
    const TwoSampleData data(sample_two_point_p0(n, spec, sy),
                             sample_two_point_q0(n, spec, sz));
    const double u = mmd_u(gram(kernel, data.pooled()), n, n,
                           identity_permutation(2 * n));
    sum += u;
    sum_sq += u * u;
  }
  const double mean = sum / reps;
  const double sd = std::sqrt((sum_sq / reps - mean * mean) / reps);
  EXPECT_NEAR(mean, target * target, 3.0 * sd);
}

TEST(PreparedStatistic, AgreesWithFreeFunctions) {
  RandomStream stream(32, 0);
  const auto kernel = KernelSpec::gaussian(0.8, 1);
  const auto data = random_two_sample(5, 6, 1, stream);
  const auto g = gram(kernel, data.pooled());
  const auto v_stat = prepare_statistic(StatisticDescriptor::mmd(kernel), data);
  const auto u_stat =
      prepare_statistic(StatisticDescriptor::mmd(kernel, true), data);
  for (int trial = 0; trial < 50; ++trial) {
    RandomStream pstream(trial, 8);
    const auto perm = random_permutation(11, pstream);
    ASSERT_NEAR(v_stat->evaluate(perm), mmd_v(g, 5, 6, perm), 1e-12);
    ASSERT_NEAR(u_stat->evaluate(perm), mmd_u(g, 5, 6, perm), 1e-12);
  }
  EXPECT_EQ(v_stat->permutation_size(), 11);
  EXPECT_NEAR(v_stat->sensitivity(), std::sqrt(2.0) / 5.0, 1e-15);
  EXPECT_NEAR(u_stat->sensitivity(), 8.0 / 5.0, 1e-15);

  const auto paired = random_paired(6, 1, 1, stream);
  const auto hsic_stat = prepare_statistic(
      StatisticDescriptor::hsic(kernel, kernel), paired);
  const auto gy = gram(kernel, paired.y);
  const auto gz = gram(kernel, paired.z);
  RandomStream zstream(9, 9);
  const auto perm_z = random_permutation(6, zstream);
  EXPECT_NEAR(hsic_stat->evaluate(perm_z), hsic_v(gy, gz, perm_z), 1e-12);
  EXPECT_EQ(hsic_stat->permutation_size(), 6);

  EXPECT_THROW(prepare_statistic(StatisticDescriptor::hsic(kernel, kernel),
                                 data),
               std::invalid_argument);
  EXPECT_THROW(prepare_statistic(StatisticDescriptor::mmd(kernel), paired),
               std::invalid_argument);
}

TEST(DirectEvaluation, MatchesGramPath) {
  RandomStream stream(33, 0);
  const auto kernel = KernelSpec::gaussian(0.5, 2);
  const auto data = random_two_sample(8, 9, 2, stream);
  EXPECT_NEAR(mmd_v_direct(kernel, data.y, data.z),
              mmd_v(gram(kernel, data.pooled()), 8, 9,
                    identity_permutation(17)),
              1e-12);
  const auto paired = random_paired(7, 2, 2, stream);
  EXPECT_NEAR(hsic_v_direct(kernel, kernel, paired),
              hsic_v(gram(kernel, paired.y), gram(kernel, paired.z),
                     identity_permutation(7)),
              1e-12);
}

}  // namespace
}  // namespace dpperm
