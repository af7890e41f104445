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

// Source model for phase-encoded three/four-state QKD with modulation errors,
// plus the configuration types shared by every estimator.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "lossq/error.hpp"

namespace lossq {

using Complex = std::complex<double>;
using DensityMatrix = Eigen::Matrix2cd;

/// Phase-modulation errors (radians) on the pi/2, pi and 3pi/2 settings.
struct SourceFlawModel {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;

  static SourceFlawModel uniform(double delta) { return {delta, delta, delta}; }

  double max_abs() const {
    return std::max({std::abs(delta1), std::abs(delta2), std::abs(delta3)});
  }

  void validate() const {
    constexpr double limit = std::numbers::pi / 4.0;
    for (double d : {delta1, delta2, delta3}) {
      detail::require(std::isfinite(d), "source flaw must be finite");
      detail::require(std::abs(d) < limit,
                      "source flaw magnitude must be below pi/4, got " + std::to_string(d));
    }
  }
};

enum class StateLabel { zero_z, one_z, zero_x, one_x };

inline StateLabel parse_state_label(std::string_view text) {
  if (text == "0z") return StateLabel::zero_z;
  if (text == "1z") return StateLabel::one_z;
  if (text == "0x") return StateLabel::zero_x;
  if (text == "1x") return StateLabel::one_x;
  throw InvalidInput("unknown state label '" + std::string(text) + "'");
}

inline std::string_view to_string(StateLabel label) {
  switch (label) {
    case StateLabel::zero_z: return "0z";
    case StateLabel::one_z: return "1z";
    case StateLabel::zero_x: return "0x";
    case StateLabel::one_x: return "1x";
  }
  return "?";
}

/// Qubit state written in the Z basis {|0z>, |1z>}.
struct PureQubitState {
  Complex amplitude0;
  Complex amplitude1;

  double norm_squared() const { return std::norm(amplitude0) + std::norm(amplitude1); }

  Eigen::Vector2cd vector() const { return {amplitude0, amplitude1}; }
};

inline Complex overlap(const PureQubitState& bra, const PureQubitState& ket) {
  return std::conj(bra.amplitude0) * ket.amplitude0 + std::conj(bra.amplitude1) * ket.amplitude1;
}

/// The four imperfect BB84 states. X-basis states are expanded with
/// |0x> = (|0z>+|1z>)/sqrt2 and |1x> = (|0z>-|1z>)/sqrt2.
inline PureQubitState prepare_state(const SourceFlawModel& flaws, StateLabel label) {
  flaws.validate();
  const double r = std::numbers::sqrt2 / 2.0;
  switch (label) {
    case StateLabel::zero_z:
      return {1.0, 0.0};
    case StateLabel::one_z:
      return {std::sin(flaws.delta2), std::cos(flaws.delta2)};
    case StateLabel::zero_x: {
      const double c = std::cos(flaws.delta1), s = std::sin(flaws.delta1);
      return {r * (c + s), r * (c - s)};
    }
    case StateLabel::one_x: {
      const double c = std::cos(flaws.delta3), s = std::sin(flaws.delta3);
      return {r * (s + c), r * (s - c)};
    }
  }
  throw InvalidInput("unknown state label");
}

inline PureQubitState prepare_state(const SourceFlawModel& flaws, std::string_view label) {
  return prepare_state(flaws, parse_state_label(label));
}

inline DensityMatrix projector(const PureQubitState& state) {
  const Eigen::Vector2cd v = state.vector();
  return v * v.adjoint();
}

namespace detail {

constexpr double kEigenClampTolerance = 1e-12;

// Square root of a Hermitian positive semidefinite 2x2 matrix. Eigenvalues
// within kEigenClampTolerance of [0, 1] are clamped into it.
inline DensityMatrix psd_sqrt(const DensityMatrix& m) {
  Eigen::SelfAdjointEigenSolver<DensityMatrix> solver(m);
  Eigen::Vector2d values = solver.eigenvalues();
  for (int i = 0; i < 2; ++i) {
    require(values[i] >= -kEigenClampTolerance, "matrix is not positive semidefinite");
    values[i] = std::clamp(values[i], 0.0, 1.0);
  }
  const Eigen::Matrix2cd& vecs = solver.eigenvectors();
  return vecs * values.cwiseSqrt().cast<Complex>().asDiagonal() * vecs.adjoint();
}

}  // namespace detail

/// Root fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)) of two 2x2 density matrices.
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  const DensityMatrix root = detail::psd_sqrt(rho);
  DensityMatrix inner = root * sigma * root;
  inner = 0.5 * (inner + inner.adjoint());
  Eigen::SelfAdjointEigenSolver<DensityMatrix> solver(inner);
  double total = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double v = solver.eigenvalues()[i];
    detail::require(v >= -detail::kEigenClampTolerance, "fidelity argument is not PSD");
    total += std::sqrt(std::clamp(v, 0.0, 1.0));
  }
  return std::min(total, 1.0);
}

/// Fidelity between the Z-basis and X-basis average states.
inline double basis_fidelity(const SourceFlawModel& flaws) {
  const DensityMatrix rho_z = 0.5 * (projector(prepare_state(flaws, StateLabel::zero_z)) +
                                     projector(prepare_state(flaws, StateLabel::one_z)));
  const DensityMatrix rho_x = 0.5 * (projector(prepare_state(flaws, StateLabel::zero_x)) +
                                     projector(prepare_state(flaws, StateLabel::one_x)));
  return fidelity(rho_z, rho_x);
}

/// Source quality: the larger overlap of the two Z states with |phi_0x>.
/// Gives 1/sqrt2 for a flawless source.
inline double quality_q(const SourceFlawModel& flaws) {
  const PureQubitState x0 = prepare_state(flaws, StateLabel::zero_x);
  return std::max(std::abs(overlap(prepare_state(flaws, StateLabel::zero_z), x0)),
                  std::abs(overlap(prepare_state(flaws, StateLabel::one_z), x0)));
}

enum class Intensity { mu = 0, nu = 1, omega = 2 };
inline constexpr std::array<Intensity, 3> kIntensities{Intensity::mu, Intensity::nu,
                                                       Intensity::omega};

inline std::string_view to_string(Intensity k) {
  switch (k) {
    case Intensity::mu: return "mu";
    case Intensity::nu: return "nu";
    case Intensity::omega: return "omega";
  }
  return "?";
}

/// Mean photon numbers of signal and two decoys.
struct IntensitySettings {
  double mu = 0.0;
  double nu = 0.0;
  double omega = 0.0;

  double at(Intensity k) const {
    switch (k) {
      case Intensity::mu: return mu;
      case Intensity::nu: return nu;
      case Intensity::omega: return omega;
    }
    return 0.0;
  }

  double single_photon_denominator() const {
    return mu * (nu - omega) - (nu * nu - omega * omega);
  }

  void validate() const {
    detail::require(std::isfinite(mu) && std::isfinite(nu) && std::isfinite(omega),
                    "intensities must be finite");
    detail::require(mu > nu && nu > omega && omega >= 0.0,
                    "intensities must satisfy mu > nu > omega >= 0");
    detail::require(single_photon_denominator() > 0.0,
                    "intensities must satisfy mu(nu-omega) > nu^2-omega^2");
  }
};

struct ProtocolProbabilities {
  double p_mu = 0.0;
  double p_nu = 0.0;
  double p_omega = 0.0;
  double p_z = 0.0;
  double p_x = 0.0;

  /// Build from the free parameters; p_omega and p_x are the complements.
  static ProtocolProbabilities from_free(double p_mu, double p_nu, double p_z) {
    return {p_mu, p_nu, 1.0 - p_mu - p_nu, p_z, 1.0 - p_z};
  }

  double at(Intensity k) const {
    switch (k) {
      case Intensity::mu: return p_mu;
      case Intensity::nu: return p_nu;
      case Intensity::omega: return p_omega;
    }
    return 0.0;
  }

  void validate() const {
    for (double p : {p_mu, p_nu, p_omega, p_z, p_x}) {
      detail::require(p > 0.0 && p < 1.0, "protocol probabilities must lie in (0,1)");
    }
    detail::require(std::abs(p_mu + p_nu + p_omega - 1.0) <= 1e-12,
                    "intensity probabilities must sum to 1");
    detail::require(std::abs(p_z + p_x - 1.0) <= 1e-12, "basis probabilities must sum to 1");
  }
};

/// Number of concentration-inequality slots behind the 21 in the secrecy term.
inline constexpr int kConcentrationSlots = 21;

/// Failure probabilities and their allocation.
struct SecurityBudget {
  double eps_tot = 1e-10;
  double eps_sec = 0.5e-10;
  double eps_corr = 0.5e-10;
  double eps_bound = 0.5e-10 / (2 * kConcentrationSlots);
  double eps_ph = 0.5e-10 / (2 * kConcentrationSlots);

  /// eps_sec = eps_corr = eps_tot/2. Each of the 21 two-sided count bounds
  /// gets eps_sec/42 per side; eps_ph takes one such share.
  static SecurityBudget from_total(double eps_tot) {
    detail::require(eps_tot > 0.0 && eps_tot < 1.0, "eps_tot must lie in (0,1)");
    SecurityBudget b;
    b.eps_tot = eps_tot;
    b.eps_sec = eps_tot / 2.0;
    b.eps_corr = eps_tot / 2.0;
    b.eps_bound = b.eps_sec / (2.0 * kConcentrationSlots);
    b.eps_ph = b.eps_bound;
    return b;
  }

  /// Failure probability consumed by `two_sided_bounds` count bounds plus,
  /// optionally, the GLLP phase-error term.
  double consumed(int two_sided_bounds, bool uses_eps_ph) const {
    return 2.0 * eps_bound * two_sided_bounds + (uses_eps_ph ? eps_ph : 0.0) + eps_corr;
  }

  void validate() const {
    for (double e : {eps_tot, eps_sec, eps_corr, eps_bound, eps_ph}) {
      detail::require(e > 0.0 && e < 1.0, "failure probabilities must lie in (0,1)");
    }
    detail::require(eps_sec + eps_corr <= eps_tot * (1.0 + 1e-12),
                    "eps_sec + eps_corr exceeds eps_tot");
  }
};

/// Measured system parameters.
struct SystemParams {
  double eta_bob = 0.0505;
  double y0 = 4.01e-5;
  double e_d = 0.0235;
  double f_rep = 5e6;
  double wavelength_nm = 1551.71;
  double f_e = 1.16;

  void validate() const {
    detail::require(eta_bob > 0.0 && eta_bob <= 1.0, "eta_bob must lie in (0,1]");
    detail::require(y0 >= 0.0 && y0 < 1.0, "y0 must lie in [0,1)");
    detail::require(e_d >= 0.0 && e_d < 0.5, "e_d must lie in [0,0.5)");
    detail::require(f_e >= 1.0, "f_e must be at least 1");
  }
};

}  // namespace lossq
