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

#include <cmath>

#include "lossq/qubit_audit.hpp"
#include "oracles.hpp"

namespace lossq {
namespace {

TEST(QubitAudit, SellmeierAt1550) {
  EXPECT_NEAR(sellmeier_index(1.55), oracle::sellmeier(1.55), 1e-14);
  EXPECT_NEAR(sellmeier_index(1.55), 2.137, 1e-3);
  EXPECT_THROW(sellmeier_index(0.5), InvalidInput);
  EXPECT_THROW(sellmeier_index(NAN), InvalidInput);
}

TEST(QubitAudit, DispersionTermAgainstFineDifference) {
  const double h = 1e-3;
  const double slope = (oracle::sellmeier(1.55 + h) - oracle::sellmeier(1.55 - h)) / (2 * h);
  EXPECT_NEAR(dispersion_term(1.55), -1.55 * slope, 1e-6);
  EXPECT_GT(dispersion_term(1.55), 0.0);
}

TEST(QubitAudit, TimingShiftOracle) {
  const ModulatorPhysics p;
  const double n = oracle::sellmeier(1.55);
  const double vpi = 1.55e-6 * p.d / (n * n * p.r_z * p.l0);
  EXPECT_NEAR(p.v_pi(), vpi, 1e-12 * vpi);
  const double e = vpi / p.d;
  const double dt =
      (0.5 * n * n * n * p.r_z * e + 1.5 * n * n * p.r_z * e * dispersion_term(1.55)) * p.l0 /
      299792458.0 * 1e9;
  EXPECT_NEAR(timing_shift(p), dt, 1e-12 * dt);
  EXPECT_NEAR(timing_shift(p), 5.87e-6, 0.05e-6);
}

TEST(QubitAudit, TimingShiftScalesWithVoltageOnly) {
  ModulatorPhysics p;
  const double base = timing_shift(p);
  p.voltage_fraction = 0.5;
  EXPECT_NEAR(timing_shift(p), 0.5 * base, 1e-12 * base);
  p.voltage_fraction = 1.0;
  p.l0 = 0.05;  // V_pi scales as 1/l0, so the product is unchanged
  EXPECT_NEAR(timing_shift(p), base, 1e-12 * base);
}

TEST(QubitAudit, TimingFidelity) {
  EXPECT_EQ(gaussian_timing_fidelity(0.0, 1.0), 1.0);
  EXPECT_NEAR(gaussian_timing_fidelity(1.0, 1.0), 0.5, 1e-15);
  const double f = gaussian_timing_fidelity(timing_shift({}), 1.0);
  EXPECT_GE(f, 1 - 1e-8);
  EXPECT_THROW(gaussian_timing_fidelity(0.0, 0.0), InvalidInput);
}

TEST(QubitAudit, PolarizationFidelityOracle) {
  for (double a2 : {0.0, 1e-4, 1e-3, 0.01}) {
    for (int j = 0; j < 4; ++j) {
      EXPECT_NEAR(polarization_fidelity({a2, 1.0 / 3.0}, j), oracle::polarization_fidelity(a2, j),
                  1e-14);
    }
  }
  EXPECT_NEAR(polarization_fidelity({0.001, 1.0 / 3.0}, 0), 1.0, 1e-15);
  EXPECT_NEAR(1 - polarization_fidelity({0.001, 1.0 / 3.0}, 3), 1e-3, 1e-6);
  EXPECT_THROW(polarization_fidelity({0.001, 1.0 / 3.0}, 4), InvalidInput);
  EXPECT_THROW(polarization_fidelity({0.7, 1.0 / 3.0}, 1), InvalidInput);
}

TEST(QubitAudit, FullModulationHasNoLeak) {
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(polarization_fidelity({0.3, 1.0}, j), 1.0, 1e-15);
}

TEST(QubitAudit, ReportCollects) {
  const auto r = audit({}, {});
  EXPECT_NEAR(r.n_e, sellmeier_index(1.55), 0.0);
  EXPECT_NEAR(r.polarization_fidelity[0], 1.0, 1e-15);
  EXPECT_LT(r.polarization_fidelity[3], r.polarization_fidelity[1]);
}

}  // namespace
}  // namespace lossq
