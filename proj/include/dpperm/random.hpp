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

#ifndef DPPERM_RANDOM_HPP_
#define DPPERM_RANDOM_HPP_

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace dpperm {

// Counter-based random streams (Philox4x32-10, Salmon et al. 2011).
//
// A stream is identified by (master_seed, stream_index). The master seed is
// the Philox key; the stream index occupies the upper 64 bits of the 128-bit
// counter and the per-stream draw counter the lower 64 bits. Distinct stream
// indices therefore yield non-overlapping counter ranges under the same key,
// and every consumer can be handed its own stream up front, which makes
// parallel Monte Carlo runs bit-reproducible regardless of scheduling.
//
// Stream indices are packed with a fixed formula, see make_stream_index().

enum class StreamPurpose : std::uint8_t {
  kPermutation = 1,         // permutation i of the main test
  kNoise = 2,               // Laplace noise draw i of the main test
  kData = 3,                // data generation, repetition r
  kLevelRandomization = 4,  // auxiliary uniform for exact-level rejection
  kShuffle = 5,             // pre-partition shuffle (subsample baselines)
  kSubtestPermutation = 6,  // permutation i of sub-test in block b
  kBaselineNoise = 7,       // Tulap / randomized-response draws
};

// stream_index = purpose(8 bits) | block(16 bits) | draw(40 bits).
inline std::uint64_t make_stream_index(StreamPurpose purpose,
                                       std::uint64_t block,
                                       std::uint64_t draw) {
  assert(block < (std::uint64_t{1} << 16));
  assert(draw < (std::uint64_t{1} << 40));
  return (static_cast<std::uint64_t>(purpose) << 56) | (block << 40) | draw;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Derives a sub-seed for a nested random context (experiment cell, repetition,
// baseline block). Chained application keeps contexts statistically disjoint:
// derive_seed(derive_seed(seed, cell), rep).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return detail::splitmix64(detail::splitmix64(seed) ^ index);
}

class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : key0_(static_cast<std::uint32_t>(master_seed)),
        key1_(static_cast<std::uint32_t>(master_seed >> 32)),
        stream_lo_(static_cast<std::uint32_t>(stream_index)),
        stream_hi_(static_cast<std::uint32_t>(stream_index >> 32)) {}

  RandomStream(std::uint64_t master_seed, StreamPurpose purpose,
               std::uint64_t block, std::uint64_t draw)
      : RandomStream(master_seed, make_stream_index(purpose, block, draw)) {}

  std::uint64_t next_u64() {
    if (buffer_pos_ == 2) {
      fill_block();
      buffer_pos_ = 0;
    }
    return buffer_[buffer_pos_++];
  }

  // Uniform on the open interval (0,1); each call consumes one 64-bit word.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Unbiased integer in [0, bound) by masked rejection.
  std::uint64_t uniform_below(std::uint64_t bound) {
    assert(bound > 0);
    if (bound == 1) return 0;
    const int bits = 64 - std::countl_zero(bound - 1);
    const std::uint64_t mask =
        bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
    for (;;) {
      const std::uint64_t x = next_u64() & mask;
      if (x < bound) return x;
    }
  }

 private:
  void fill_block() {
    // Philox4x32-10.
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    std::uint32_t c0 = static_cast<std::uint32_t>(block_counter_);
    std::uint32_t c1 = static_cast<std::uint32_t>(block_counter_ >> 32);
    std::uint32_t c2 = stream_lo_;
    std::uint32_t c3 = stream_hi_;
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c0;
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n1 = lo1;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      const std::uint32_t n3 = lo0;
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += kW0;
      k1 += kW1;
    }
    buffer_[0] = (static_cast<std::uint64_t>(c1) << 32) | c0;
    buffer_[1] = (static_cast<std::uint64_t>(c3) << 32) | c2;
    ++block_counter_;
  }

  std::uint32_t key0_, key1_;
  std::uint32_t stream_lo_, stream_hi_;
  std::uint64_t block_counter_ = 0;
  std::uint64_t buffer_[2] = {0, 0};
  int buffer_pos_ = 2;
};

// Standard Laplace(0,1) quantile function:
//   F^{-1}(t) = log(2t) for t < 1/2 and -log(2(1-t)) for t >= 1/2.
inline double laplace_quantile(double t) {
  return t < 0.5 ? std::log(2.0 * t) : -std::log(2.0 * (1.0 - t));
}

// One Laplace(0,1) draw via the inverse CDF, consuming exactly one uniform
// from the stream.
inline double laplace_sample(RandomStream& stream) {
  return laplace_quantile(stream.uniform01());
}

// Geometric on {0,1,2,...} with success probability 1-b, P(X = j) = (1-b)b^j,
// via inverse CDF. Requires b in (0,1).
inline std::int64_t geometric_sample(double b, RandomStream& stream) {
  assert(b > 0.0 && b < 1.0);
  const double u = stream.uniform01();
  return static_cast<std::int64_t>(std::floor(std::log(u) / std::log(b)));
}

// Uniform random permutation of [0, size) by Fisher-Yates.
inline std::vector<std::int32_t> random_permutation(std::size_t size,
                                                    RandomStream& stream) {
  std::vector<std::int32_t> perm(size);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = size; i > 1; --i) {
    const std::uint64_t j = stream.uniform_below(i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

inline std::vector<std::int32_t> identity_permutation(std::size_t size) {
  std::vector<std::int32_t> perm(size);
  std::iota(perm.begin(), perm.end(), 0);
  return perm;
}

}  // namespace dpperm

#endif  // DPPERM_RANDOM_HPP_
