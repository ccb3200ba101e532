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

#ifndef DPPERM_STATISTICS_HPP_
#define DPPERM_STATISTICS_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dpperm/kernels.hpp"

namespace dpperm {

// Two-sample layout: pooled sample X = (Y_1..Y_n, Z_1..Z_m), permutations act
// on all N = n + m indices.
struct TwoSampleData {
  Eigen::MatrixXd y;
  Eigen::MatrixXd z;

  TwoSampleData(Eigen::MatrixXd y_in, Eigen::MatrixXd z_in)
      : y(std::move(y_in)), z(std::move(z_in)) {
    if (y.rows() < 1 || z.rows() < 1 || y.cols() != z.cols()) {
      throw std::invalid_argument(
          "TwoSampleData: need n, m >= 1 and matching dimensions");
    }
  }

  Eigen::Index n() const { return y.rows(); }
  Eigen::Index m() const { return z.rows(); }

  Eigen::MatrixXd pooled() const {
    Eigen::MatrixXd x(y.rows() + z.rows(), y.cols());
    x.topRows(y.rows()) = y;
    x.bottomRows(z.rows()) = z;
    return x;
  }
};

// Paired layout for independence testing: permutations act on the Z block
// only, of size n.
struct PairedData {
  Eigen::MatrixXd y;
  Eigen::MatrixXd z;

  PairedData(Eigen::MatrixXd y_in, Eigen::MatrixXd z_in)
      : y(std::move(y_in)), z(std::move(z_in)) {
    if (y.rows() < 1 || y.rows() != z.rows()) {
      throw std::invalid_argument("PairedData: need equal row counts n >= 1");
    }
  }

  Eigen::Index n() const { return y.rows(); }
};

enum class StatisticKind { kMmdV, kMmdU, kHsicV, kHsicU, kMeanDiff };

namespace detail {

// Compensated (Kahan) accumulation; the permuted statistics sum up to ~10^6
// kernel entries and the V-U identity tests run at 1e-10 tolerances.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }

  double value() const { return sum; }
};

inline void check_two_sample_shapes(const Eigen::MatrixXd& gram, long n,
                                    long m,
                                    std::span<const std::int32_t> perm) {
  if (n < 1 || m < 1 || gram.rows() != gram.cols() || gram.rows() != n + m ||
      static_cast<long>(perm.size()) != n + m) {
    throw std::invalid_argument("mmd: gram/permutation size mismatch");
  }
}

inline void check_paired_shapes(const Eigen::MatrixXd& gram_y,
                                const Eigen::MatrixXd& gram_z,
                                std::span<const std::int32_t> perm_z) {
  if (gram_y.rows() != gram_y.cols() || gram_z.rows() != gram_z.cols() ||
      gram_y.rows() != gram_z.rows() ||
      static_cast<long>(perm_z.size()) != gram_y.rows()) {
    throw std::invalid_argument("hsic: gram/permutation size mismatch");
  }
}

}  // namespace detail

// Empirical (plug-in) MMD of the permuted pooled sample:
//   sqrt( n^-2 sum_{i,j<=n} G[pi_i,pi_j] + m^-2 sum_{i,j>n} G[pi_i,pi_j]
//         - 2(nm)^-1 sum_{i<=n,j>n} G[pi_i,pi_j] ),
// radicand clamped at zero before the square root.
inline double mmd_v(const Eigen::MatrixXd& gram_pooled, long n, long m,
                    std::span<const std::int32_t> perm) {
  detail::check_two_sample_shapes(gram_pooled, n, m, perm);
  detail::KahanSum syy, szz, syz;
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) syy.add(gram_pooled(perm[i], perm[j]));
    for (long j = n; j < n + m; ++j) syz.add(gram_pooled(perm[i], perm[j]));
  }
  for (long i = n; i < n + m; ++i) {
    for (long j = n; j < n + m; ++j) szz.add(gram_pooled(perm[i], perm[j]));
  }
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  const double radicand = syy.value() / (dn * dn) + szz.value() / (dm * dm) -
                          2.0 * syz.value() / (dn * dm);
  return std::sqrt(std::max(radicand, 0.0));
}

// U-statistic of the squared MMD (unbiased; may be negative):
// off-diagonal within-sample averages minus twice the cross average.
inline double mmd_u(const Eigen::MatrixXd& gram_pooled, long n, long m,
                    std::span<const std::int32_t> perm) {
  detail::check_two_sample_shapes(gram_pooled, n, m, perm);
  if (n < 2 || m < 2) {
    throw std::invalid_argument("mmd_u: requires n >= 2 and m >= 2");
  }
  detail::KahanSum syy, szz, syz;
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      if (j != i) syy.add(gram_pooled(perm[i], perm[j]));
    }
    for (long j = n; j < n + m; ++j) syz.add(gram_pooled(perm[i], perm[j]));
  }
  for (long i = n; i < n + m; ++i) {
    for (long j = n; j < n + m; ++j) {
      if (j != i) szz.add(gram_pooled(perm[i], perm[j]));
    }
  }
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return syy.value() / (dn * (dn - 1.0)) + szz.value() / (dm * (dm - 1.0)) -
         2.0 * syz.value() / (dn * dm);
}

// Difference V_MMD - U_MMD in closed form, for kernels with constant diagonal
// K (read off gram(0,0)):
//   (1/n + 1/m) K - OD_Y / (n^2 (n-1)) - OD_Z / (m^2 (m-1)),
// with OD the off-diagonal within-sample sums of the unpermuted statistic.
inline double v_u_gap_mmd(const Eigen::MatrixXd& gram_pooled, long n, long m) {
  if (n < 2 || m < 2) {
    throw std::invalid_argument("v_u_gap_mmd: requires n >= 2 and m >= 2");
  }
  if (gram_pooled.rows() != gram_pooled.cols() || gram_pooled.rows() != n + m) {
    throw std::invalid_argument("v_u_gap_mmd: gram size mismatch");
  }
  const double diag = gram_pooled(0, 0);
  detail::KahanSum od_y, od_z;
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      if (j != i) od_y.add(gram_pooled(i, j));
    }
  }
  for (long i = n; i < n + m; ++i) {
    for (long j = n; j < n + m; ++j) {
      if (j != i) od_z.add(gram_pooled(i, j));
    }
  }
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return diag * (1.0 / dn + 1.0 / dm) -
         od_y.value() / (dn * dn * (dn - 1.0)) -
         od_z.value() / (dm * dm * (dm - 1.0));
}

// Empirical HSIC with the Z block permuted:
//   sqrt( n^-2 sum_ij k_ij l_{pi_i pi_j} + n^-4 (sum k)(sum l)
//         - 2 n^-3 sum_i (sum_j k_ij)(sum_j l_{pi_i j}) ),
// radicand clamped at zero.
inline double hsic_v(const Eigen::MatrixXd& gram_y,
                     const Eigen::MatrixXd& gram_z,
                     std::span<const std::int32_t> perm_z) {
  detail::check_paired_shapes(gram_y, gram_z, perm_z);
  const long n = gram_y.rows();
  const double dn = static_cast<double>(n);
  detail::KahanSum cross;
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      cross.add(gram_y(i, j) * gram_z(perm_z[i], perm_z[j]));
    }
  }
  const Eigen::VectorXd row_y = gram_y.rowwise().sum();
  const Eigen::VectorXd row_z = gram_z.rowwise().sum();
  detail::KahanSum mixed;
  for (long i = 0; i < n; ++i) mixed.add(row_y(i) * row_z(perm_z[i]));
  const double sum_y = row_y.sum();
  const double sum_z = row_z.sum();
  const double radicand = cross.value() / (dn * dn) +
                          sum_y * sum_z / (dn * dn * dn * dn) -
                          2.0 * mixed.value() / (dn * dn * dn);
  return std::sqrt(std::max(radicand, 0.0));
}

namespace detail {

// The three sums over non-repeating index tuples behind the HSIC U-statistic,
// computed in O(n^2) after zeroing the diagonals:
//   t1 = sum over distinct (i,j)        of k_ij l_ij
//   t3 = sum over distinct (i,j1,j2)    of k_{i j1} l_{i j2}
//   t2 = sum over distinct (i1,i2,j1,j2) of k_{i1 j1} l_{i2 j2}
struct HsicTupleSums {
  double t1, t2, t3;
};

inline HsicTupleSums hsic_tuple_sums(const Eigen::MatrixXd& gram_y,
                                     const Eigen::MatrixXd& gram_z,
                                     std::span<const std::int32_t> perm_z) {
  const long n = gram_y.rows();
  KahanSum p_off;        // sum_{i != j} k_ij l_ij
  KahanSum row_product;  // sum_i (zero-diag row sums product)
  KahanSum sum_k_off, sum_l_off;
  const Eigen::VectorXd row_l = gram_z.rowwise().sum();
  for (long i = 0; i < n; ++i) {
    KahanSum row_k;
    for (long j = 0; j < n; ++j) {
      if (j == i) continue;
      const double kij = gram_y(i, j);
      p_off.add(kij * gram_z(perm_z[i], perm_z[j]));
      row_k.add(kij);
    }
    const double rk = row_k.value();
    const double rl = row_l(perm_z[i]) - gram_z(perm_z[i], perm_z[i]);
    sum_k_off.add(rk);
    sum_l_off.add(rl);
    row_product.add(rk * rl);
  }
  const double t1 = p_off.value();
  const double t3 = row_product.value() - t1;
  const double t2 = sum_k_off.value() * sum_l_off.value() -
                    4.0 * row_product.value() + 2.0 * t1;
  return {t1, t2, t3};
}

}  // namespace detail

// U-statistic of the squared HSIC over non-repeating tuples; unbiased, may be
// negative. Equals the naive O(n^4) tuple enumeration exactly.
inline double hsic_u(const Eigen::MatrixXd& gram_y,
                     const Eigen::MatrixXd& gram_z,
                     std::span<const std::int32_t> perm_z) {
  detail::check_paired_shapes(gram_y, gram_z, perm_z);
  const long n = gram_y.rows();
  if (n < 4) throw std::invalid_argument("hsic_u: requires n >= 4");
  const auto s = detail::hsic_tuple_sums(gram_y, gram_z, perm_z);
  const double dn = static_cast<double>(n);
  return s.t1 / (dn * (dn - 1.0)) +
         s.t2 / (dn * (dn - 1.0) * (dn - 2.0) * (dn - 3.0)) -
         2.0 * s.t3 / (dn * (dn - 1.0) * (dn - 2.0));
}

// Difference HSIC_V^2 - U_HSIC = D1 + D2 in closed form, for kernels with
// constant diagonals K = gram_y(0,0) and L = gram_z(0,0). D1 collects the
// permutation-invariant part.
inline double hsic_v_u_gap(const Eigen::MatrixXd& gram_y,
                           const Eigen::MatrixXd& gram_z) {
  if (gram_y.rows() != gram_y.cols() || gram_z.rows() != gram_z.cols() ||
      gram_y.rows() != gram_z.rows() || gram_y.rows() < 4) {
    throw std::invalid_argument("hsic_v_u_gap: need square grams with n >= 4");
  }
  const long n = gram_y.rows();
  const double dn = static_cast<double>(n);
  const double big_k = gram_y(0, 0);
  const double big_l = gram_z(0, 0);
  const auto identity = [&] {
    std::vector<std::int32_t> id(n);
    for (long i = 0; i < n; ++i) id[i] = static_cast<std::int32_t>(i);
    return id;
  }();
  const auto s = detail::hsic_tuple_sums(gram_y, gram_z, identity);
  detail::KahanSum sk_off, sl_off;
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      if (j == i) continue;
      sk_off.add(gram_y(i, j));
      sl_off.add(gram_z(i, j));
    }
  }
  const double d1 = (dn - 1.0) / (dn * dn) * big_k * big_l -
                    big_l / (dn * dn * dn) * sk_off.value() -
                    big_k / (dn * dn * dn) * sl_off.value();
  const double n2 = dn * dn, n4 = n2 * n2;
  const double d2 =
      -(3.0 * n2 - 4.0 * dn + 2.0) / ((dn - 1.0) * n4) * s.t1 +
      2.0 * (5.0 * n2 - 8.0 * dn + 4.0) / (n4 * (dn - 1.0) * (dn - 2.0)) *
          s.t3 -
      (6.0 * n2 - 11.0 * dn + 6.0) /
          (n4 * (dn - 1.0) * (dn - 2.0) * (dn - 3.0)) * s.t2;
  return d1 + d2;
}

// l_p norm of the difference of permuted block means. p_norm >= 1;
// infinity selects the max-coordinate norm.
inline double mean_diff(const Eigen::MatrixXd& pooled, long n, long m,
                        double p_norm, std::span<const std::int32_t> perm) {
  if (pooled.rows() != n + m || static_cast<long>(perm.size()) != n + m) {
    throw std::invalid_argument("mean_diff: shape mismatch");
  }
  if (!(p_norm >= 1.0)) {
    throw std::invalid_argument("mean_diff: p_norm must be >= 1");
  }
  Eigen::VectorXd mean1 = Eigen::VectorXd::Zero(pooled.cols());
  Eigen::VectorXd mean2 = Eigen::VectorXd::Zero(pooled.cols());
  for (long i = 0; i < n; ++i) mean1 += pooled.row(perm[i]);
  for (long i = n; i < n + m; ++i) mean2 += pooled.row(perm[i]);
  const Eigen::VectorXd diff =
      mean1 / static_cast<double>(n) - mean2 / static_cast<double>(m);
  if (std::isinf(p_norm)) return diff.cwiseAbs().maxCoeff();
  if (p_norm == 2.0) return diff.norm();
  if (p_norm == 1.0) return diff.cwiseAbs().sum();
  return std::pow(diff.cwiseAbs().array().pow(p_norm).sum(), 1.0 / p_norm);
}

// Global-sensitivity constants (permutation-uniform, Hamming distance 1):
//   mmd_v:     sqrt(2K) / min(n,m)
//   hsic_v:    4 (n-1) n^-2 sqrt(KL)
//   mmd_u:     8K / min(n,m)       (upper endpoint of c_{m,n} in [4,8])
//   hsic_u:    24 K L / n          (upper endpoint of c_n in [2,24])
//   mean_diff: domain_diameter / min(n,m)
inline double sensitivity(StatisticKind kind, double bound_k, double bound_l,
                          long n, long m, double domain_diameter = 0.0) {
  switch (kind) {
    case StatisticKind::kMmdV:
      if (n < 1 || m < 1) throw std::invalid_argument("sensitivity: n,m >= 1");
      return std::sqrt(2.0 * bound_k) / static_cast<double>(std::min(n, m));
    case StatisticKind::kMmdU:
      if (n < 2 || m < 2) throw std::invalid_argument("sensitivity: n,m >= 2");
      return 8.0 * bound_k / static_cast<double>(std::min(n, m));
    case StatisticKind::kHsicV: {
      if (n < 1) throw std::invalid_argument("sensitivity: n >= 1");
      const double dn = static_cast<double>(n);
      return 4.0 * (dn - 1.0) / (dn * dn) * std::sqrt(bound_k * bound_l);
    }
    case StatisticKind::kHsicU:
      if (n < 4) throw std::invalid_argument("sensitivity: n >= 4");
      return 24.0 * bound_k * bound_l / static_cast<double>(n);
    case StatisticKind::kMeanDiff:
      if (n < 1 || m < 1) throw std::invalid_argument("sensitivity: n,m >= 1");
      if (!(domain_diameter > 0.0)) {
        throw std::invalid_argument(
            "sensitivity: mean_diff needs a positive domain diameter");
      }
      return domain_diameter / static_cast<double>(std::min(n, m));
  }
  throw std::logic_error("sensitivity: unknown kind");
}

// Gram-free evaluation of the unpermuted empirical MMD for large samples
// (O(N^2) time, O(1) memory).
inline double mmd_v_direct(const KernelSpec& kernel, const Eigen::MatrixXd& y,
                           const Eigen::MatrixXd& z) {
  const long n = y.rows(), m = z.rows();
  detail::KahanSum syy, szz, syz;
  for (long i = 0; i < n; ++i) {
    syy.add(kernel_bound(kernel));
    for (long j = i + 1; j < n; ++j) {
      syy.add(2.0 * evaluate(kernel, y.row(i), y.row(j)));
    }
    for (long j = 0; j < m; ++j) {
      syz.add(evaluate(kernel, y.row(i), z.row(j)));
    }
  }
  for (long i = 0; i < m; ++i) {
    szz.add(kernel_bound(kernel));
    for (long j = i + 1; j < m; ++j) {
      szz.add(2.0 * evaluate(kernel, z.row(i), z.row(j)));
    }
  }
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  const double radicand = syy.value() / (dn * dn) + szz.value() / (dm * dm) -
                          2.0 * syz.value() / (dn * dm);
  return std::sqrt(std::max(radicand, 0.0));
}

// Gram-free evaluation of the unpermuted empirical HSIC (O(n^2) time,
// O(n) memory).
inline double hsic_v_direct(const KernelSpec& kernel_y,
                            const KernelSpec& kernel_z,
                            const PairedData& data) {
  const long n = data.n();
  const double dn = static_cast<double>(n);
  std::vector<detail::KahanSum> row_k(n), row_l(n);
  detail::KahanSum cross;
  for (long i = 0; i < n; ++i) {
    const double kb = kernel_bound(kernel_y), lb = kernel_bound(kernel_z);
    row_k[i].add(kb);
    row_l[i].add(lb);
    cross.add(kb * lb);
    for (long j = i + 1; j < n; ++j) {
      const double kij = evaluate(kernel_y, data.y.row(i), data.y.row(j));
      const double lij = evaluate(kernel_z, data.z.row(i), data.z.row(j));
      row_k[i].add(kij);
      row_k[j].add(kij);
      row_l[i].add(lij);
      row_l[j].add(lij);
      cross.add(2.0 * kij * lij);
    }
  }
  detail::KahanSum sum_k, sum_l, mixed;
  for (long i = 0; i < n; ++i) {
    sum_k.add(row_k[i].value());
    sum_l.add(row_l[i].value());
    mixed.add(row_k[i].value() * row_l[i].value());
  }
  const double radicand = cross.value() / (dn * dn) +
                          sum_k.value() * sum_l.value() / (dn * dn * dn * dn) -
                          2.0 * mixed.value() / (dn * dn * dn);
  return std::sqrt(std::max(radicand, 0.0));
}

// A statistic together with the global-sensitivity bound the Laplace
// mechanism consumes. Kernels apply to the kernel statistics; p_norm and
// domain_diameter to mean_diff only.
struct StatisticDescriptor {
  StatisticKind kind = StatisticKind::kMmdV;
  std::optional<KernelSpec> kernel_y;  // MMD: pooled kernel. HSIC: kernel k.
  std::optional<KernelSpec> kernel_z;  // HSIC: kernel l.
  double p_norm = 2.0;
  double domain_diameter = 0.0;

  static StatisticDescriptor mmd(KernelSpec kernel, bool u_statistic = false) {
    StatisticDescriptor d;
    d.kind = u_statistic ? StatisticKind::kMmdU : StatisticKind::kMmdV;
    d.kernel_y = std::move(kernel);
    return d;
  }

  static StatisticDescriptor hsic(KernelSpec kernel_y, KernelSpec kernel_z,
                                  bool u_statistic = false) {
    StatisticDescriptor d;
    d.kind = u_statistic ? StatisticKind::kHsicU : StatisticKind::kHsicV;
    d.kernel_y = std::move(kernel_y);
    d.kernel_z = std::move(kernel_z);
    return d;
  }

  static StatisticDescriptor mean_difference(double p_norm,
                                             double domain_diameter) {
    StatisticDescriptor d;
    d.kind = StatisticKind::kMeanDiff;
    d.p_norm = p_norm;
    d.domain_diameter = domain_diameter;
    return d;
  }
};

inline bool is_two_sample(StatisticKind kind) {
  return kind == StatisticKind::kMmdV || kind == StatisticKind::kMmdU ||
         kind == StatisticKind::kMeanDiff;
}

// A statistic bound to a dataset with all kernel evaluations done up front;
// evaluate() is then a pure function of the permutation and safe to call
// concurrently against the shared read-only state.
class PreparedStatistic {
 public:
  virtual ~PreparedStatistic() = default;
  virtual double evaluate(std::span<const std::int32_t> perm) const = 0;
  virtual long permutation_size() const = 0;
  virtual double sensitivity() const = 0;
};

namespace detail {

class PreparedMmd : public PreparedStatistic {
 public:
  PreparedMmd(const StatisticDescriptor& desc, const TwoSampleData& data)
      : n_(data.n()),
        m_(data.m()),
        u_statistic_(desc.kind == StatisticKind::kMmdU) {
    if (u_statistic_ && (n_ < 2 || m_ < 2)) {
      throw std::invalid_argument("mmd_u: requires n >= 2 and m >= 2");
    }
    const Eigen::MatrixXd pooled = data.pooled();
    gram_ = gram(*desc.kernel_y, pooled);
    KahanSum total;
    for (long i = 0; i < n_ + m_; ++i) {
      for (long j = 0; j < n_ + m_; ++j) total.add(gram_(i, j));
    }
    total_ = total.value();
    sensitivity_ = dpperm::sensitivity(desc.kind, kernel_bound(*desc.kernel_y),
                                       0.0, n_, m_);
  }

  double evaluate(std::span<const std::int32_t> perm) const override {
    // The pooled Gram total is permutation invariant, so the cross sum
    // follows from the two within-sample sums.
    KahanSum syy, szz;
    for (long i = 0; i < n_; ++i) {
      for (long j = 0; j < n_; ++j) syy.add(gram_(perm[i], perm[j]));
    }
    for (long i = n_; i < n_ + m_; ++i) {
      for (long j = n_; j < n_ + m_; ++j) szz.add(gram_(perm[i], perm[j]));
    }
    const double cross = 0.5 * (total_ - syy.value() - szz.value());
    const double dn = static_cast<double>(n_), dm = static_cast<double>(m_);
    if (!u_statistic_) {
      const double radicand = syy.value() / (dn * dn) +
                              szz.value() / (dm * dm) -
                              2.0 * cross / (dn * dm);
      return std::sqrt(std::max(radicand, 0.0));
    }
    KahanSum diag_y, diag_z;
    for (long i = 0; i < n_; ++i) diag_y.add(gram_(perm[i], perm[i]));
    for (long i = n_; i < n_ + m_; ++i) diag_z.add(gram_(perm[i], perm[i]));
    return (syy.value() - diag_y.value()) / (dn * (dn - 1.0)) +
           (szz.value() - diag_z.value()) / (dm * (dm - 1.0)) -
           2.0 * cross / (dn * dm);
  }

  long permutation_size() const override { return n_ + m_; }
  double sensitivity() const override { return sensitivity_; }

 private:
  long n_, m_;
  bool u_statistic_;
  Eigen::MatrixXd gram_;
  double total_ = 0.0;
  double sensitivity_ = 0.0;
};

class PreparedHsic : public PreparedStatistic {
 public:
  PreparedHsic(const StatisticDescriptor& desc, const PairedData& data)
      : n_(data.n()), u_statistic_(desc.kind == StatisticKind::kHsicU) {
    if (u_statistic_ && n_ < 4) {
      throw std::invalid_argument("hsic_u: requires n >= 4");
    }
    gram_y_ = gram(*desc.kernel_y, data.y);
    gram_z_ = gram(*desc.kernel_z, data.z);
    sensitivity_ = dpperm::sensitivity(desc.kind, kernel_bound(*desc.kernel_y),
                                       kernel_bound(*desc.kernel_z), n_, n_);
  }

  double evaluate(std::span<const std::int32_t> perm) const override {
    return u_statistic_ ? hsic_u(gram_y_, gram_z_, perm)
                        : hsic_v(gram_y_, gram_z_, perm);
  }

  long permutation_size() const override { return n_; }
  double sensitivity() const override { return sensitivity_; }

 private:
  long n_;
  bool u_statistic_;
  Eigen::MatrixXd gram_y_, gram_z_;
  double sensitivity_ = 0.0;
};

class PreparedMeanDiff : public PreparedStatistic {
 public:
  PreparedMeanDiff(const StatisticDescriptor& desc, const TwoSampleData& data)
      : n_(data.n()),
        m_(data.m()),
        p_norm_(desc.p_norm),
        pooled_(data.pooled()) {
    sensitivity_ = dpperm::sensitivity(StatisticKind::kMeanDiff, 0.0, 0.0, n_,
                                       m_, desc.domain_diameter);
    // the declared diameter is the sensitivity contract; data violating it
    // is detectable here
    for (long i = 0; i < pooled_.rows(); ++i) {
      for (long j = i + 1; j < pooled_.rows(); ++j) {
        const Eigen::VectorXd diff = pooled_.row(i) - pooled_.row(j);
        const double dist =
            std::isinf(p_norm_)
                ? diff.cwiseAbs().maxCoeff()
                : std::pow(diff.cwiseAbs().array().pow(p_norm_).sum(),
                           1.0 / p_norm_);
        if (dist > desc.domain_diameter * (1.0 + 1e-12)) {
          throw std::invalid_argument(
              "mean_diff: observations exceed the declared domain diameter");
        }
      }
    }
  }

  double evaluate(std::span<const std::int32_t> perm) const override {
    return mean_diff(pooled_, n_, m_, p_norm_, perm);
  }

  long permutation_size() const override { return n_ + m_; }
  double sensitivity() const override { return sensitivity_; }

 private:
  long n_, m_;
  double p_norm_;
  Eigen::MatrixXd pooled_;
  double sensitivity_ = 0.0;
};

}  // namespace detail

inline std::unique_ptr<PreparedStatistic> prepare_statistic(
    const StatisticDescriptor& desc, const TwoSampleData& data) {
  if (!is_two_sample(desc.kind)) {
    throw std::invalid_argument(
        "prepare_statistic: statistic requires paired data");
  }
  if (desc.kind == StatisticKind::kMeanDiff) {
    return std::make_unique<detail::PreparedMeanDiff>(desc, data);
  }
  return std::make_unique<detail::PreparedMmd>(desc, data);
}

inline std::unique_ptr<PreparedStatistic> prepare_statistic(
    const StatisticDescriptor& desc, const PairedData& data) {
  if (is_two_sample(desc.kind)) {
    throw std::invalid_argument(
        "prepare_statistic: statistic requires two-sample data");
  }
  return std::make_unique<detail::PreparedHsic>(desc, data);
}

}  // namespace dpperm

#endif  // DPPERM_STATISTICS_HPP_
