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

// Side-channel checks on the qubit assumption for a LiNbO3 phase modulator:
// modulation-dependent timing, and polarization leakage through a finite
// extinction ratio.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "lossq/error.hpp"

namespace lossq {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// Extraordinary index of LiNbO3, wavelength in micrometres.
inline double sellmeier_index(double wavelength_um) {
  detail::require(std::isfinite(wavelength_um) && wavelength_um >= 1.0 && wavelength_um <= 2.0,
                  "wavelength outside the Sellmeier window [1.0, 2.0] um");
  const double l2 = wavelength_um * wavelength_um;
  constexpr std::array<std::array<double, 2>, 3> terms{{{2.980, 0.020}, {0.598, 0.067},
                                                        {8.954, 416.08}}};
  double n2 = 1.0;
  for (const auto& [b, c] : terms) {
    detail::require(std::abs(l2 - c) > 1e-12, "wavelength sits on a Sellmeier pole");
    n2 += b * l2 / (l2 - c);
  }
  detail::require(n2 > 0.0, "Sellmeier form gives a nonpositive n^2");
  return std::sqrt(n2);
}

struct ModulatorPhysics {
  double r_z = 30.8e-12;         ///< m/V
  double d = 10e-6;              ///< m
  double l0 = 0.02;              ///< m
  double wavelength_um = 1.55;
  double pulse_fwhm_ns = 1.0;
  double voltage_fraction = 1.0;  ///< V / V_pi

  double n_e() const { return sellmeier_index(wavelength_um); }

  double v_pi() const {
    const double n = n_e();
    return wavelength_um * 1e-6 * d / (n * n * r_z * l0);
  }

  void validate() const {
    detail::require(r_z > 0.0 && d > 0.0 && l0 > 0.0 && pulse_fwhm_ns > 0.0,
                    "modulator parameters must be positive");
    detail::require(voltage_fraction >= 0.0, "voltage must be nonnegative");
    sellmeier_index(wavelength_um);
  }
};

/// omega * dn_e/domega = -lambda * dn_e/dlambda, central difference.
inline double dispersion_term(double wavelength_um, double step_um = 1e-4) {
  const double lo = wavelength_um - step_um, hi = wavelength_um + step_um;
  const double slope = (sellmeier_index(hi) - sellmeier_index(lo)) / (hi - lo);
  return -wavelength_um * slope;
}

/// Group-delay difference between phase settings 0 and V, in ns.
inline double timing_shift(const ModulatorPhysics& p) {
  p.validate();
  const double n = p.n_e();
  const double field = p.voltage_fraction * p.v_pi() / p.d;  // V/d
  const double seconds = (0.5 * n * n * n * p.r_z * field +
                          1.5 * n * n * p.r_z * field * dispersion_term(p.wavelength_um)) *
                         p.l0 / kSpeedOfLight;
  return seconds * 1e9;
}

/// Root fidelity of two Gaussian pulses (intensity FWHM T) offset by dt:
/// amplitude overlap exp(-ln2 dt^2 / T^2).
inline double gaussian_timing_fidelity(double dt_ns, double fwhm_ns) {
  detail::require(fwhm_ns > 0.0, "pulse width must be positive");
  return std::exp(-std::numbers::ln2 * dt_ns * dt_ns / (fwhm_ns * fwhm_ns));
}

struct PolarizationLeak {
  double alpha_sq = 0.001;
  double modulation_ratio = 1.0 / 3.0;

  void validate() const {
    detail::require(alpha_sq >= 0.0 && alpha_sq < 0.5, "alpha^2 must lie in [0, 0.5)");
    detail::require(std::isfinite(modulation_ratio), "modulation ratio must be finite");
  }
};

/// |<phi_j|phi'_j>| in the (S_y, S_z, R_y, R_z) mode basis. The ideal state
/// carries the same input polarization alpha|y> + beta|z> on both pulses.
inline double polarization_fidelity(const PolarizationLeak& leak, int j) {
  leak.validate();
  detail::require(j >= 0 && j <= 3, "state index must lie in {0,1,2,3}");
  using C = std::complex<double>;
  const double a = std::sqrt(leak.alpha_sq);
  const double b = std::sqrt(1.0 - leak.alpha_sq);
  const double phase = j * std::numbers::pi / 2.0;
  const C main = std::polar(1.0, phase);
  const C weak = std::polar(1.0, phase * leak.modulation_ratio);
  const double r = std::numbers::sqrt2 / 2.0;
  const std::array<C, 4> ideal{r * a * main, r * b * main, C(r * a), C(r * b)};
  const std::array<C, 4> actual{r * a * weak, r * b * main, C(r * a), C(r * b)};
  C ip = 0.0;
  for (int i = 0; i < 4; ++i) ip += std::conj(ideal[i]) * actual[i];
  return std::abs(ip);
}

struct AuditReport {
  double n_e = 0.0;
  double v_pi = 0.0;
  double timing_shift_ns = 0.0;
  double timing_fidelity = 1.0;
  std::array<double, 4> polarization_fidelity{};
};

inline AuditReport audit(const ModulatorPhysics& phys, const PolarizationLeak& leak) {
  AuditReport r;
  r.n_e = phys.n_e();
  r.v_pi = phys.v_pi();
  r.timing_shift_ns = timing_shift(phys);
  r.timing_fidelity = gaussian_timing_fidelity(r.timing_shift_ns, phys.pulse_fwhm_ns);
  for (int j = 0; j < 4; ++j) r.polarization_fidelity[j] = lossq::polarization_fidelity(leak, j);
  return r;
}

}  // namespace lossq
