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


#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "lossq/decoy.hpp"
#include "lossq/stats_bounds.hpp"
#include "oracles.hpp"

namespace lossq {
namespace {

TEST(Stats, HoeffdingClosedForm) {
  EXPECT_NEAR(hoeffding_delta(100.0, std::exp(-2.0)), 10.0, 1e-12);
  EXPECT_DOUBLE_EQ(hoeffding_delta(0.0, 1e-10), 0.0);
  EXPECT_THROW(hoeffding_delta(-1.0, 0.1), InvalidInput);
  EXPECT_THROW(hoeffding_delta(1.0, 0.0), InvalidInput);
  EXPECT_THROW(hoeffding_delta(1.0, 1.0), InvalidInput);
}

TEST(Stats, CountBoundsClampAtZero) {
  const auto b = count_bounds(3.0, 1e-10);
  EXPECT_EQ(b.lower, 0.0);
  EXPECT_GT(b.upper, 3.0);
  const auto big = count_bounds(1e8, 1e-10);
  EXPECT_NEAR(big.upper - big.observed, big.observed - big.lower, 1e-6);
}

TEST(Stats, BinaryEntropy) {
  EXPECT_DOUBLE_EQ(binary_entropy(0.5), 1.0);
  EXPECT_DOUBLE_EQ(binary_entropy(0.0), 0.0);
  EXPECT_DOUBLE_EQ(binary_entropy(1.0), 0.0);
  for (double p : {0.01, 0.1, 0.3}) {
    EXPECT_NEAR(binary_entropy(p), binary_entropy(1 - p), 1e-15);
    EXPECT_NEAR(binary_entropy(p), oracle::h2(p), 1e-15);
  }
  EXPECT_THROW(binary_entropy(1.5), InvalidInput);
}

const IntensitySettings kIn{0.41, 0.05, 0.001};
const ProtocolProbabilities kProbs = ProtocolProbabilities::from_free(0.64, 0.27, 0.70);

TEST(Decoy, TauMatchesDirectSum) {
  const oracle::Decoy o{0.41, 0.05, 0.001, 0.64, 0.27, 0.09, 0.0};
  for (int n = 0; n < 6; ++n) EXPECT_NEAR(tau(n, kIn, kProbs), o.tau(n), 1e-15);
  // Sum over photon numbers is one.
  double total = 0.0;
  for (int n = 0; n < 40; ++n) total += tau(n, kIn, kProbs);
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Decoy, FiveKmRecordMatchesOracle) {
  // Z-basis gains of the 5 km run.
  const ClassCounts nz{7.84e7, 2.23e6, 2.60e4};
  const double eps = 5e-11 / 42;
  const oracle::Decoy o{0.41, 0.05, 0.001, 0.64, 0.27, 0.09, eps};
  const DecoyOptions opts{eps, true, BoundConvention::conservative};
  const std::array<double, 3> n{nz.mu, nz.nu, nz.omega};
  const auto b = estimate_class(nz, kIn, kProbs, opts);
  EXPECT_NEAR(b.s0_lower, o.s0(n), 1e-9 * o.s0(n));
  EXPECT_NEAR(b.s1_lower, o.s1(n), 1e-9 * o.s1(n));
  EXPECT_NEAR(*b.s1_upper, o.s1_upper(n), 1e-9 * o.s1_upper(n));
}

// Expected counts for a linear channel with yields Y_n = 1 - (1-eta)^n (1-y0).
std::array<double, 3> linear_counts(const IntensitySettings& in, const ProtocolProbabilities& p,
                                    double n_pulses, double eta, double y0, double& s0, double& s1) {
  std::array<double, 3> out{};
  s0 = s1 = 0.0;
  const double mus[3] = {in.mu, in.nu, in.omega};
  const double ps[3] = {p.p_mu, p.p_nu, p.p_omega};
  for (int k = 0; k < 3; ++k) {
    for (int n = 0; n < 60; ++n) {
      const double y = 1 - std::pow(1 - eta, n) * (1 - y0);
      const double c = n_pulses * ps[k] * oracle::poisson(mus[k], n) * y;
      out[k] += c;
      if (n == 0) s0 += c;
      if (n == 1) s1 += c;
    }
  }
  return out;
}

TEST(Decoy, AsymptoticBoundsBracketTruth) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> eta(1e-3, 0.2), y0(1e-6, 1e-4);
  for (int i = 0; i < 200; ++i) {
    double s0 = 0, s1 = 0;
    const auto n = linear_counts(kIn, kProbs, 1e10, eta(rng), y0(rng), s0, s1);
    const ClassCounts c{n[0], n[1], n[2]};
    const auto b = estimate_class(c, kIn, kProbs, {1e-12, false, BoundConvention::conservative});
    EXPECT_LE(b.s0_lower, s0 * (1 + 1e-12));
    EXPECT_LE(b.s1_lower, s1 * (1 + 1e-12));
    EXPECT_GE(*b.s1_upper, s1 * (1 - 1e-12));
  }
}

TEST(Decoy, TightAsDecoysVanish) {
  const IntensitySettings in{0.3, 5e-4, 0.0};
  double s0 = 0, s1 = 0;
  const auto n = linear_counts(in, kProbs, 1e12, 0.01, 5e-5, s0, s1);
  const auto b = estimate_class({n[0], n[1], n[2]}, in, kProbs, {1e-12, false, BoundConvention::conservative});
  EXPECT_NEAR(b.s0_lower / s0, 1.0, 1e-3);
  EXPECT_NEAR(b.s1_lower / s1, 1.0, 1e-3);
  EXPECT_NEAR(*b.s1_upper / s1, 1.0, 1e-3);
}

TEST(Decoy, AsPrintedUpperBoundUndercutsTruth) {
  // Without the e^k / P_k weights the upper bound falls below the true count.
  double s0 = 0, s1 = 0;
  const auto n = linear_counts(kIn, kProbs, 1e10, 0.05, 4e-5, s0, s1);
  const ClassCounts c{n[0], n[1], n[2]};
  const double printed = single_upper(c, kIn, kProbs, {1e-12, false, BoundConvention::as_printed});
  const double conservative =
      single_upper(c, kIn, kProbs, {1e-12, false, BoundConvention::conservative});
  EXPECT_LT(printed, s1);
  EXPECT_GE(conservative, s1);
}

TEST(Decoy, BoundsStayInsideClass) {
  const ClassCounts c{10.0, 1000.0, 0.0};
  const auto b = estimate_class(c, kIn, kProbs, {});
  EXPECT_GE(b.s0_lower, 0.0);
  EXPECT_GE(b.s1_lower, 0.0);
  EXPECT_LE(*b.s1_upper, c.total());
}

TEST(Decoy, VacuumLowerMonotoneInOmegaCounts) {
  double prev = -1.0;
  for (double om : {1e3, 5e3, 1e4, 5e4}) {
    const double v = vacuum_lower({1e7, 1e6, om}, kIn, kProbs, {});
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Decoy, RejectsNegativeCounts) {
  EXPECT_THROW(estimate_class({-1.0, 1.0, 1.0}, kIn, kProbs, {}), InvalidInput);
}

}  // namespace
}  // namespace lossq
