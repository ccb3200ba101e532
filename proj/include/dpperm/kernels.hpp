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

#ifndef DPPERM_KERNELS_HPP_
#define DPPERM_KERNELS_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace dpperm {

// Bounded translation-invariant kernels.
//
//   gaussian(sigma):   k(x,y) = exp(-sigma * ||x-y||_2^2),  K = 1
//   laplacian(sigma):  k(x,y) = exp(-sigma * ||x-y||_1),    K = 1
//   gaussian_product(lambda_1..lambda_d):
//       k(x,y) = prod_i (2 pi)^{-1/2} lambda_i^{-1}
//                       exp(-(x_i-y_i)^2 / (2 lambda_i^2)),
//       K = prod_i (2 pi)^{-1/2} lambda_i^{-1}
struct KernelSpec {
  enum class Family { kGaussian, kLaplacian, kGaussianProduct };

  Family family;
  int dimension;
  double sigma = 1.0;          // gaussian / laplacian rate
  Eigen::VectorXd bandwidths;  // gaussian_product lambdas

  static KernelSpec gaussian(double sigma, int dimension) {
    if (!(sigma > 0.0)) throw std::invalid_argument("kernel: sigma <= 0");
    return {Family::kGaussian, dimension, sigma, {}};
  }

  static KernelSpec laplacian(double sigma, int dimension) {
    if (!(sigma > 0.0)) throw std::invalid_argument("kernel: sigma <= 0");
    return {Family::kLaplacian, dimension, sigma, {}};
  }

  static KernelSpec gaussian_product(Eigen::VectorXd lambdas) {
    if (lambdas.size() == 0 || (lambdas.array() <= 0.0).any()) {
      throw std::invalid_argument("kernel: bandwidths must be positive");
    }
    const int d = static_cast<int>(lambdas.size());
    return {Family::kGaussianProduct, d, 1.0, std::move(lambdas)};
  }
};

// K = sup_{x,y} k(x,y) = k(x,x), attained on the diagonal.
inline double kernel_bound(const KernelSpec& kernel) {
  switch (kernel.family) {
    case KernelSpec::Family::kGaussian:
    case KernelSpec::Family::kLaplacian:
      return 1.0;
    case KernelSpec::Family::kGaussianProduct: {
      double bound = 1.0;
      for (Eigen::Index i = 0; i < kernel.bandwidths.size(); ++i) {
        bound /= std::sqrt(2.0 * std::numbers::pi) * kernel.bandwidths[i];
      }
      return bound;
    }
  }
  throw std::logic_error("kernel_bound: unknown family");
}

template <typename RowX, typename RowY>
double evaluate(const KernelSpec& kernel, const RowX& x, const RowY& y) {
  if (x.size() != kernel.dimension || y.size() != kernel.dimension) {
    throw std::invalid_argument("kernel evaluate: dimension mismatch");
  }
  switch (kernel.family) {
    case KernelSpec::Family::kGaussian:
      return std::exp(-kernel.sigma * (x - y).squaredNorm());
    case KernelSpec::Family::kLaplacian:
      return std::exp(-kernel.sigma * (x - y).cwiseAbs().sum());
    case KernelSpec::Family::kGaussianProduct: {
      double value = 1.0;
      for (int i = 0; i < kernel.dimension; ++i) {
        const double diff = x[i] - y[i];
        const double lam = kernel.bandwidths[i];
        value *= std::exp(-diff * diff / (2.0 * lam * lam)) /
                 (std::sqrt(2.0 * std::numbers::pi) * lam);
      }
      return value;
    }
  }
  throw std::logic_error("kernel evaluate: unknown family");
}

// Dense Gram matrix between the rows of A and B. For A == B the result is
// exactly symmetric with constant diagonal kernel_bound (entries (i,j) and
// (j,i) are filled from one evaluation).
inline Eigen::MatrixXd gram(const KernelSpec& kernel, const Eigen::MatrixXd& a,
                            const Eigen::MatrixXd& b) {
  if (a.cols() != kernel.dimension || b.cols() != kernel.dimension) {
    throw std::invalid_argument("gram: dimension mismatch");
  }
  Eigen::MatrixXd g(a.rows(), b.rows());
  const bool same = (&a == &b);
  if (same) {
    const double diag = kernel_bound(kernel);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      g(i, i) = diag;
      for (Eigen::Index j = i + 1; j < a.rows(); ++j) {
        const double v = evaluate(kernel, a.row(i), a.row(j));
        g(i, j) = v;
        g(j, i) = v;
      }
    }
  } else {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < b.rows(); ++j) {
        g(i, j) = evaluate(kernel, a.row(i), b.row(j));
      }
    }
  }
  return g;
}

inline Eigen::MatrixXd gram(const KernelSpec& kernel,
                            const Eigen::MatrixXd& a) {
  return gram(kernel, a, a);
}

// Median of pairwise Euclidean distances over all unordered pairs. Point sets
// larger than 1000 are first reduced by deterministic stride subsampling so
// the cost stays below ~10^6 distance evaluations. Even pair counts take the
// average of the two middle order statistics.
inline double median_heuristic(const Eigen::MatrixXd& points) {
  if (points.rows() < 2) {
    throw std::invalid_argument("median_heuristic: need at least two points");
  }
  constexpr Eigen::Index kMaxPoints = 1000;
  std::vector<Eigen::Index> idx;
  if (points.rows() > kMaxPoints) {
    const Eigen::Index stride = (points.rows() + kMaxPoints - 1) / kMaxPoints;
    for (Eigen::Index i = 0; i < points.rows(); i += stride) idx.push_back(i);
  } else {
    for (Eigen::Index i = 0; i < points.rows(); ++i) idx.push_back(i);
  }
  std::vector<double> dist;
  dist.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      dist.push_back((points.row(idx[i]) - points.row(idx[j])).norm());
    }
  }
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + mid, dist.end());
  double median = dist[mid];
  if (dist.size() % 2 == 0) {
    const double lower =
        *std::max_element(dist.begin(), dist.begin() + mid);
    median = 0.5 * (lower + median);
  }
  if (!(median > 0.0)) {
    throw std::domain_error(
        "median_heuristic: degenerate point set (all points identical)");
  }
  return median;
}

// Gaussian kernel whose rate is calibrated from the data as
// sigma = 1 / (2 * median^2), i.e. exp(-||x-y||^2 / (2 median^2)).
inline KernelSpec median_gaussian_kernel(const Eigen::MatrixXd& points) {
  const double med = median_heuristic(points);
  return KernelSpec::gaussian(1.0 / (2.0 * med * med),
                              static_cast<int>(points.cols()));
}

}  // namespace dpperm

#endif  // DPPERM_KERNELS_HPP_
