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

// Certified upper bounds on phase-modulator errors from interference counts.
// With Bob's modulator fixed at 0, detector 1 sees sin^2(phi/2) and detector 2
// sees cos^2(phi/2), so phi = 2 arctan sqrt(I1/I2) after dark subtraction and
// efficiency correction. The ratio fixes phi only up to phi -> 2pi - phi, so
// targets above pi are compared against their reflection 2pi - theta.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "lossq/core_model.hpp"
#include "lossq/stats_bounds.hpp"

namespace lossq {

struct CalibrationRow {
  double theta = 0.0;  ///< target phase, radians
  double d1 = 0.0;
  double d2 = 0.0;
};

struct CalibrationRecord {
  std::string system;
  std::vector<CalibrationRow> rows;
  double eta_d1 = 1.0;
  double eta_d2 = 1.0;
  bool efficiencies_defaulted = false;
  double eps = 1e-10;
  std::optional<double> dark_d1;  ///< per-detector dark baselines; default D_{1,0}
  std::optional<double> dark_d2;

  const CalibrationRow* find(double theta) const {
    for (const auto& r : rows) {
      if (std::abs(r.theta - theta) < 1e-9) return &r;
    }
    return nullptr;
  }

  void validate() const {
    detail::require(find(0.0) != nullptr, "calibration record has no theta = 0 reference row");
    for (const auto& r : rows) {
      detail::require(r.d1 >= 0.0 && r.d2 >= 0.0 && std::isfinite(r.d1) && std::isfinite(r.d2),
                      "calibration counts must be finite and nonnegative");
    }
    detail::require(eta_d1 > 0.0 && eta_d1 <= 1.0 && eta_d2 > 0.0 && eta_d2 <= 1.0,
                    "detector efficiencies must lie in (0,1]");
    detail::require(eps > 0.0 && eps < 1.0, "eps must lie in (0,1)");
  }
};

struct CalibrationOptions {
  bool finite_size = true;
};

inline double modulation_error_upper(const CalibrationRecord& rec, double theta,
                                     const CalibrationOptions& opts = {}) {
  rec.validate();
  const CalibrationRow* row = rec.find(theta);
  detail::require(row != nullptr, "no calibration row for theta = " + std::to_string(theta));
  detail::require(theta > 0.0 && theta < 2.0 * std::numbers::pi, "theta must lie in (0, 2pi)");
  const CalibrationRow& ref = *rec.find(0.0);
  auto dev = [&](double n) { return opts.finite_size ? hoeffding_delta(n, rec.eps) : 0.0; };

  const double dark1 = rec.dark_d1.value_or(ref.d1);
  const double dark2 = rec.dark_d2.value_or(ref.d1);
  const double numerator = ((row->d1 + dev(row->d1)) - (dark1 - dev(dark1))) / rec.eta_d1;
  const double denominator = ((row->d2 - dev(row->d2)) - (dark2 + dev(dark2))) / rec.eta_d2;
  if (!(denominator > 0.0) || !(numerator > 0.0)) {
    throw InvalidInput("insufficient counts for calibration at theta = " + std::to_string(theta));
  }
  const double phase = 2.0 * std::atan(std::sqrt(numerator / denominator));
  const double folded = theta <= std::numbers::pi ? theta : 2.0 * std::numbers::pi - theta;
  return std::abs(folded - phase);
}

struct CalibrationResult {
  SourceFlawModel flaws;  ///< (pi/2, pi, 3pi/2) bounds
  double max_delta = 0.0;
  std::vector<std::string> warnings;
};

inline CalibrationResult worst_case_flaws(const CalibrationRecord& rec,
                                          const CalibrationOptions& opts = {}) {
  using std::numbers::pi;
  CalibrationResult out;
  out.flaws = {modulation_error_upper(rec, pi / 2, opts), modulation_error_upper(rec, pi, opts),
               modulation_error_upper(rec, 3 * pi / 2, opts)};
  out.max_delta = out.flaws.max_abs();
  if (rec.efficiencies_defaulted) {
    out.warnings.push_back("detector efficiencies not supplied; assumed equal");
  }
  return out;
}

}  // namespace lossq
