// Copyright 2026 The lossq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Phase-error estimation from rejected (basis-mismatch) data.
//
// Bob's X-basis outcome s is described by the Pauli coefficients
// q_{s|I}, q_{s|z}, q_{s|x} of his POVM element. The observed conditional
// yields for Alice's 0z, 1z, 0x states are A*q, and the yields of the
// virtual X-basis measurement on Alice's side are B*q, so the virtual
// yields follow from observed data as B*A^{-1}*observed.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "lossq/core_model.hpp"
#include "lossq/error.hpp"

namespace lossq {

struct TransferMatrices {
  Eigen::Matrix3d a;
  Eigen::Matrix<double, 2, 3> b;

  /// B * A^{-1}; throws if A is numerically singular.
  Eigen::Matrix<double, 2, 3> virtual_map() const {
    detail::require(std::abs(a.determinant()) > 1e-9,
                    "transfer matrix A is singular (|det A| <= 1e-9)");
    return b * a.inverse();
  }
};

/// Columns are ordered (q_I, q_z, q_x).
inline TransferMatrices transfer_matrices(const SourceFlawModel& flaws) {
  flaws.validate();
  const double c22 = std::cos(2 * flaws.delta2), s22 = std::sin(2 * flaws.delta2);
  const double c21 = std::cos(2 * flaws.delta1), s21 = std::sin(2 * flaws.delta1);
  const double s2 = std::sin(flaws.delta2), c2 = std::cos(flaws.delta2);
  TransferMatrices m;
  m.a << 1.0, 1.0, 0.0,
         1.0, -c22, s22,
         1.0, s21, c21;
  m.b << (1 + s2), s2 * (1 + s2), c2 * (1 + s2),
         (1 - s2), -s2 * (1 - s2), -c2 * (1 - s2);
  m.b /= 12.0;
  detail::require(std::abs(m.a.determinant()) > 1e-9,
                  "transfer matrix A is singular (|det A| <= 1e-9)");
  return m;
}

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  static Interval point(double v) { return {v, v}; }
  bool contains(double v, double tol = 0.0) const { return v >= lower - tol && v <= upper + tol; }
};

/// Single-photon bounds per Bob X outcome j (index 0 for 0x, 1 for 1x) and
/// Alice source state (index 0: 0z, 1: 1z, 2: 0x).
struct MismatchSingles {
  std::array<std::array<Interval, 3>, 2> by_outcome{};

  void validate() const {
    for (const auto& row : by_outcome) {
      for (const Interval& v : row) {
        detail::require(v.lower >= 0.0 && v.lower <= v.upper && std::isfinite(v.upper),
                        "mismatch single-photon bounds must satisfy 0 <= lower <= upper");
      }
    }
  }
};

/// Virtual counts indexed [alice virtual bit][bob outcome].
struct VirtualSingles {
  std::array<std::array<Interval, 2>, 2> counts{};
  bool clamped = false;  ///< some bound was raised to zero

  const Interval& at(int alice, int bob) const { return counts.at(alice).at(bob); }
};

/// Propagates the box of observed singles through B*A^{-1}. Each output bound
/// takes, per coefficient sign, the input bound that extremizes it.
inline VirtualSingles virtual_singles(const MismatchSingles& m, const ProtocolProbabilities& probs,
                                      const SourceFlawModel& flaws) {
  m.validate();
  probs.validate();
  const Eigen::Matrix<double, 2, 3> map = transfer_matrices(flaws).virtual_map();
  const std::array<double, 3> weight{2 * probs.p_x, 2 * probs.p_x, probs.p_z};

  VirtualSingles out;
  for (int j = 0; j < 2; ++j) {
    for (int row = 0; row < 2; ++row) {
      double lo = 0.0, hi = 0.0;
      for (int col = 0; col < 3; ++col) {
        const double c = map(row, col) * weight[col];
        const Interval& v = m.by_outcome[j][col];
        lo += c * (c >= 0 ? v.lower : v.upper);
        hi += c * (c >= 0 ? v.upper : v.lower);
      }
      lo /= probs.p_z;
      hi /= probs.p_z;
      if (lo < 0.0 || hi < 0.0) out.clamped = true;
      out.counts[row][j] = {std::max(lo, 0.0), std::max(hi, 0.0)};
    }
  }
  return out;
}

struct PhaseErrorEstimate {
  double value = 0.0;
  bool saturated = false;  ///< raw ratio exceeded 1/2
};

inline PhaseErrorEstimate phase_error_upper(const VirtualSingles& v) {
  const double numerator = v.at(0, 1).upper + v.at(1, 0).upper;
  const double denominator =
      v.at(0, 0).lower + v.at(0, 1).lower + v.at(1, 0).lower + v.at(1, 1).lower;
  if (!(denominator > 0.0)) {
    throw EstimationFailure("phase-error", "estimation failed: insufficient statistics");
  }
  const double ratio = numerator / denominator;
  return {std::clamp(ratio, 0.0, 0.5), ratio > 0.5};
}

/// Pauli coefficients q_{s|I}, q_{s|z}, q_{s|x} = Tr[D_s sigma]/2 for each
/// X outcome s of Bob.
struct BobPovm {
  std::array<std::array<double, 3>, 2> q{};

  static BobPovm from_operators(const DensityMatrix& d0, const DensityMatrix& d1) {
    DensityMatrix sz, sx;
    sz << 1, 0, 0, -1;
    sx << 0, 1, 1, 0;
    BobPovm p;
    const std::array<const DensityMatrix*, 2> ds{&d0, &d1};
    for (int s = 0; s < 2; ++s) {
      p.q[s] = {ds[s]->trace().real() / 2, (*ds[s] * sz).trace().real() / 2,
                (*ds[s] * sx).trace().real() / 2};
    }
    return p;
  }

  /// Lossless, noiseless X measurement.
  static BobPovm ideal() { return {{{{0.5, 0.0, 0.5}, {0.5, 0.0, -0.5}}}}; }
};

struct AsymptoticYields {
  std::array<std::array<double, 3>, 2> observed{};  ///< [s][0z,1z,0x], conditional yields A*q
  std::array<std::array<double, 2>, 2> virtual_joint{};  ///< [s][alice j], B*q
  double phase_error = 0.0;
};

/// Exact yields of the qubit model for a known Bob POVM.
inline AsymptoticYields asymptotic_yield_oracle(const SourceFlawModel& flaws, const BobPovm& povm) {
  const TransferMatrices m = transfer_matrices(flaws);
  AsymptoticYields out;
  for (int s = 0; s < 2; ++s) {
    const Eigen::Vector3d q(povm.q[s][0], povm.q[s][1], povm.q[s][2]);
    const Eigen::Vector3d y = m.a * q;
    const Eigen::Vector2d v = m.b * q;
    for (int i = 0; i < 3; ++i) out.observed[s][i] = y[i];
    out.virtual_joint[s] = {v[0], v[1]};
  }
  // Errors: Bob's bit differs from Alice's virtual bit.
  const auto& y = out.virtual_joint;
  const double total = y[0][0] + y[0][1] + y[1][0] + y[1][1];
  out.phase_error = total > 0.0 ? (y[1][0] + y[0][1]) / total : 0.0;
  return out;
}

}  // namespace lossq
