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

#ifndef DPPERM_SYNTHETIC_HPP_
#define DPPERM_SYNTHETIC_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "dpperm/kernels.hpp"
#include "dpperm/random.hpp"
#include "dpperm/statistics.hpp"

namespace dpperm {

// Smooth bump-antibump perturbation on (0,1), odd about 1/2 with |P| <= 1:
//   P(x) =  exp(1 - 1/(1-(4x-1)^2))  on (0, 1/2)
//          -exp(1 - 1/(1-(4x-3)^2))  on (1/2, 1)
// and 0 elsewhere.
inline double perturbation_1d(double x) {
  if (x > 0.0 && x < 0.5) {
    const double t = 4.0 * x - 1.0;
    return std::exp(1.0 - 1.0 / (1.0 - t * t));
  }
  if (x > 0.5 && x < 1.0) {
    const double t = 4.0 * x - 3.0;
    return -std::exp(1.0 - 1.0 / (1.0 - t * t));
  }
  return 0.0;
}

struct PerturbedUniformSpec {
  int dimension;
  double amplitude;  // a in [0,1]

  PerturbedUniformSpec(int d, double a) : dimension(d), amplitude(a) {
    if (d < 1) throw std::invalid_argument("perturbed uniform: dimension >= 1");
    if (!(a >= 0.0 && a <= 1.0)) {
      throw std::invalid_argument("perturbed uniform: amplitude in [0,1]");
    }
  }
};

// Density 1(x in [0,1]^d) * (1 + a prod_i P(x_i)); the perturbation is
// supported strictly inside the cube, so the product stays nonnegative and
// integrates to one.
template <typename Vec>
double perturbed_uniform_density(const Vec& x,
                                 const PerturbedUniformSpec& spec) {
  if (static_cast<int>(x.size()) != spec.dimension) {
    throw std::invalid_argument("perturbed_uniform_density: dimension");
  }
  double product = 1.0;
  for (int i = 0; i < spec.dimension; ++i) {
    if (x[i] < 0.0 || x[i] > 1.0) return 0.0;
    product *= perturbation_1d(x[i]);
  }
  return 1.0 + spec.amplitude * product;
}

// Exact sampling by rejection under the envelope (1+a) * Uniform([0,1]^d);
// the acceptance probability is 1/(1+a) >= 1/2. Each proposal consumes d+1
// uniforms from the stream.
inline Eigen::MatrixXd sample_perturbed_uniform(long n,
                                                const PerturbedUniformSpec& spec,
                                                RandomStream& stream) {
  Eigen::MatrixXd points(n, spec.dimension);
  Eigen::VectorXd x(spec.dimension);
  for (long row = 0; row < n; ++row) {
    for (;;) {
      for (int i = 0; i < spec.dimension; ++i) x[i] = stream.uniform01();
      const double u = stream.uniform01();
      if (u * (1.0 + spec.amplitude) <= perturbed_uniform_density(x, spec)) {
        points.row(row) = x;
        break;
      }
    }
  }
  return points;
}

// Joint perturbed uniform in dimension d_y + d_z; the marginals are exactly
// uniform (the perturbation integrates to zero along every axis) while the
// dependence between the Y and Z blocks grows with the amplitude.
inline PairedData sample_joint_perturbed_uniform(long n, int d_y, int d_z,
                                                 double amplitude,
                                                 RandomStream& stream) {
  const PerturbedUniformSpec joint(d_y + d_z, amplitude);
  const Eigen::MatrixXd points = sample_perturbed_uniform(n, joint, stream);
  return PairedData(points.leftCols(d_y), points.rightCols(d_z));
}

// Two-atom pair of distributions P0 = p0 d_x + (1-p0) d_v and
// Q0 = q0 d_x + (1-q0) d_v.
struct TwoPointSpec {
  Eigen::VectorXd x;
  Eigen::VectorXd v;
  double p0;
  double q0;

  TwoPointSpec(Eigen::VectorXd x_in, Eigen::VectorXd v_in, double p0_in,
               double q0_in)
      : x(std::move(x_in)), v(std::move(v_in)), p0(p0_in), q0(q0_in) {
    if (x.size() != v.size() || x.size() == 0) {
      throw std::invalid_argument("TwoPointSpec: atom dimension mismatch");
    }
    if (!(p0 > 0.0 && p0 < 1.0) || !(q0 > 0.0 && q0 < 1.0)) {
      throw std::invalid_argument("TwoPointSpec: weights must lie in (0,1)");
    }
  }
};

// Dependent two-atom pair: uniform marginals on {y1,y2} and {z1,z2} with
// joint probabilities 1/4 + nu on the diagonal cells and 1/4 - nu off it.
struct DependentTwoPointSpec {
  Eigen::VectorXd y1, y2;
  Eigen::VectorXd z1, z2;
  double nu;

  DependentTwoPointSpec(Eigen::VectorXd y1_in, Eigen::VectorXd y2_in,
                        Eigen::VectorXd z1_in, Eigen::VectorXd z2_in,
                        double nu_in)
      : y1(std::move(y1_in)),
        y2(std::move(y2_in)),
        z1(std::move(z1_in)),
        z2(std::move(z2_in)),
        nu(nu_in) {
    if (y1.size() != y2.size() || z1.size() != z2.size()) {
      throw std::invalid_argument("DependentTwoPointSpec: dimension mismatch");
    }
    if (!(nu > 0.0 && nu <= 0.25)) {
      throw std::invalid_argument("DependentTwoPointSpec: nu in (0, 1/4]");
    }
  }
};

// Population MMD between P0 and Q0 for a translation-invariant kernel:
//   sqrt( 2 (p0-q0)^2 (kappa(0) - kappa(x-v)) ).
inline double two_point_mmd(const TwoPointSpec& spec,
                            const KernelSpec& kernel) {
  const double kappa0 = kernel_bound(kernel);
  const double kappa_xv = evaluate(kernel, spec.x, spec.v);
  const double diff = spec.p0 - spec.q0;
  return std::sqrt(std::max(2.0 * diff * diff * (kappa0 - kappa_xv), 0.0));
}

// Population HSIC of the dependent two-point joint distribution:
//   2 nu sqrt( (kappa_Y(0) - kappa_Y(y1-y2)) (kappa_Z(0) - kappa_Z(z1-z2)) ).
inline double two_point_hsic(const DependentTwoPointSpec& spec,
                             const KernelSpec& kernel_y,
                             const KernelSpec& kernel_z) {
  const double gap_y =
      kernel_bound(kernel_y) - evaluate(kernel_y, spec.y1, spec.y2);
  const double gap_z =
      kernel_bound(kernel_z) - evaluate(kernel_z, spec.z1, spec.z2);
  return 2.0 * spec.nu * std::sqrt(std::max(gap_y * gap_z, 0.0));
}

// n categorical draws from weight * d_x + (1-weight) * d_v.
inline Eigen::MatrixXd sample_two_point(long n, const TwoPointSpec& spec,
                                        double weight, RandomStream& stream) {
  Eigen::MatrixXd points(n, spec.x.size());
  for (long i = 0; i < n; ++i) {
    points.row(i) = (stream.uniform01() <= weight) ? spec.x : spec.v;
  }
  return points;
}

inline Eigen::MatrixXd sample_two_point_p0(long n, const TwoPointSpec& spec,
                                           RandomStream& stream) {
  return sample_two_point(n, spec, spec.p0, stream);
}

inline Eigen::MatrixXd sample_two_point_q0(long n, const TwoPointSpec& spec,
                                           RandomStream& stream) {
  return sample_two_point(n, spec, spec.q0, stream);
}

// n draws from the dependent two-point joint distribution; one uniform per
// row selects among the four cells.
inline PairedData sample_dependent_two_point(long n,
                                             const DependentTwoPointSpec& spec,
                                             RandomStream& stream) {
  Eigen::MatrixXd y(n, spec.y1.size());
  Eigen::MatrixXd z(n, spec.z1.size());
  const double diag = 0.25 + spec.nu;
  const double off = 0.25 - spec.nu;
  for (long i = 0; i < n; ++i) {
    const double u = stream.uniform01();
    if (u < diag) {
      y.row(i) = spec.y1;
      z.row(i) = spec.z1;
    } else if (u < 2.0 * diag) {
      y.row(i) = spec.y2;
      z.row(i) = spec.z2;
    } else if (u < 2.0 * diag + off) {
      y.row(i) = spec.y1;
      z.row(i) = spec.z2;
    } else {
      y.row(i) = spec.y2;
      z.row(i) = spec.z1;
    }
  }
  return PairedData(std::move(y), std::move(z));
}

}  // namespace dpperm

#endif  // DPPERM_SYNTHETIC_HPP_
