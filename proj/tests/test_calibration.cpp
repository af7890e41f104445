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

#include <numbers>
#include <string>

#include "lossq/calibration.hpp"
#include "lossq/io.hpp"
#include "oracles.hpp"

namespace lossq {
namespace {

using std::numbers::pi;

io::CalibrationFile load(const std::string& name) {
  return io::load_calibration(std::string(LOSSQ_DATA_DIR) + "/" + name);
}

TEST(Calibration, MatchesOracleOnFixtures) {
  for (const char* name : {"calibration_id500.json", "calibration_clavis2.json"}) {
    const auto f = load(name);
    const auto& rec = f.record;
    const auto& ref = *rec.find(0.0);
    for (double theta : {pi / 2, pi, 3 * pi / 2}) {
      const auto& row = *rec.find(theta);
      EXPECT_NEAR(modulation_error_upper(rec, theta),
                  oracle::delta_bar(theta, row.d1, row.d2, ref.d1, rec.eta_d1, rec.eta_d2, rec.eps),
                  1e-12)
          << name << " theta " << theta;
    }
  }
}

TEST(Calibration, Id500WorstCase) {
  const auto r = worst_case_flaws(load("calibration_id500.json").record);
  EXPECT_NEAR(r.flaws.delta1, 0.013, 0.002);
  EXPECT_NEAR(r.flaws.delta2, 0.134, 0.002);
  EXPECT_NEAR(r.flaws.delta3, 0.030, 0.002);
  EXPECT_EQ(r.max_delta, r.flaws.delta2);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Calibration, MissingEfficienciesWarn) {
  const auto f = load("calibration_clavis2.json");
  EXPECT_TRUE(f.record.efficiencies_defaulted);
  EXPECT_FALSE(worst_case_flaws(f.record).warnings.empty());
}

TEST(Calibration, FiniteSizeRaisesPhaseEstimate) {
  // The deviations push the inferred phase upward at every setting.
  const auto rec = load("calibration_id500.json").record;
  const double asym = modulation_error_upper(rec, pi / 2, {false});
  const double fin = modulation_error_upper(rec, pi / 2);
  EXPECT_NE(asym, fin);
  EXPECT_GT(modulation_error_upper(rec, pi, {false}), modulation_error_upper(rec, pi));
}

TEST(Calibration, PerfectModulatorBoundsNearZero) {
  CalibrationRecord rec;
  rec.rows = {{0.0, 0.0, 1e9}, {pi / 2, 5e8, 5e8}, {pi, 1e9, 0.0}};
  EXPECT_NEAR(modulation_error_upper(rec, pi / 2, {false}), 0.0, 1e-12);
}

TEST(Calibration, InputErrors) {
  CalibrationRecord rec;
  rec.rows = {{pi / 2, 10, 10}};
  EXPECT_THROW(rec.validate(), InvalidInput);
  rec.rows = {{0.0, 100, 1e6}, {pi / 2, 10, 0}};
  EXPECT_THROW(modulation_error_upper(rec, pi / 2), InvalidInput);
  EXPECT_THROW(modulation_error_upper(rec, pi), InvalidInput);
  rec.rows[1].d1 = -1;
  EXPECT_THROW(rec.validate(), InvalidInput);
}

}  // namespace
}  // namespace lossq
