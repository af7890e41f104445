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

// Finite-data decoy-state bounds on vacuum and single-photon event counts
// for one event class observed at three intensities.
//
// With a_k = e^k n_k / P_k = sum_n k^n/n! * s_n/tau_n, the vacuum bound
// eliminates the single-photon term between the two decoys, the single-photon
// lower bound additionally uses the signal to cap the multiphoton tail, and
// the single-photon upper bound drops the (nonnegative) multiphoton terms of
// a_nu - a_omega.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string_view>

#include "lossq/core_model.hpp"
#include "lossq/stats_bounds.hpp"

namespace lossq {

/// Observed counts of one event class at each intensity.
struct ClassCounts {
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
  double& at(Intensity k) {
    switch (k) {
      case Intensity::mu: return mu;
      case Intensity::nu: return nu;
      case Intensity::omega: return omega;
    }
    return mu;
  }
  double total() const { return mu + nu + omega; }

  void validate() const {
    for (double n : {mu, nu, omega}) {
      detail::require(std::isfinite(n) && n >= 0.0, "class counts must be finite and nonnegative");
    }
  }

  friend ClassCounts operator+(ClassCounts a, const ClassCounts& b) {
    return {a.mu + b.mu, a.nu + b.nu, a.omega + b.omega};
  }
  friend ClassCounts operator-(ClassCounts a, const ClassCounts& b) {
    return {a.mu - b.mu, a.nu - b.nu, a.omega - b.omega};
  }
  friend ClassCounts operator*(double s, ClassCounts a) {
    return {s * a.mu, s * a.nu, s * a.omega};
  }
};

struct PhotonNumberBounds {
  double s0_lower = 0.0;
  double s1_lower = 0.0;
  std::optional<double> s1_upper;
};

/// Which count bound enters each term of the single-photon bounds.
/// `conservative` keeps every bound valid; `as_printed` follows the
/// published superscripts literally (nu upper / omega lower in the lower
/// bound, and no e^k/P_k weights in the upper bound).
enum class BoundConvention { conservative, as_printed };

inline std::string_view to_string(BoundConvention c) {
  return c == BoundConvention::conservative ? "conservative" : "as-printed";
}

inline BoundConvention parse_bound_convention(std::string_view text) {
  if (text == "conservative") return BoundConvention::conservative;
  if (text == "as-printed" || text == "as_printed") return BoundConvention::as_printed;
  throw InvalidInput("unknown bound convention '" + std::string(text) + "'");
}

struct DecoyOptions {
  double eps_bound = 1e-10 / 84.0;
  bool finite_size = true;
  BoundConvention convention = BoundConvention::conservative;
};

/// Probability that the source emits an n-photon pulse.
inline double tau(int n, const IntensitySettings& intensities, const ProtocolProbabilities& probs) {
  detail::require(n >= 0, "photon number must be nonnegative");
  double sum = 0.0;
  for (Intensity k : kIntensities) {
    const double m = intensities.at(k);
    // k^n e^-k / n! evaluated in log space; 0^0 = 1.
    const double poisson =
        (m == 0.0) ? (n == 0 ? 1.0 : 0.0)
                   : std::exp(-m + n * std::log(m) - std::lgamma(static_cast<double>(n) + 1.0));
    sum += probs.at(k) * poisson;
  }
  return sum;
}

namespace detail {

inline BoundedCount bound_for(double n, const DecoyOptions& opts) {
  return opts.finite_size ? count_bounds(n, opts.eps_bound) : exact_count(n);
}

struct ClassBounds {
  BoundedCount mu, nu, omega;
};

inline ClassBounds bound_class(const ClassCounts& counts, const DecoyOptions& opts) {
  counts.validate();
  return {bound_for(counts.mu, opts), bound_for(counts.nu, opts), bound_for(counts.omega, opts)};
}

inline void check_settings(const IntensitySettings& intensities, const ProtocolProbabilities& probs) {
  intensities.validate();
  probs.validate();
}

inline double clamp_to_class(double value, const ClassCounts& counts) {
  return std::clamp(value, 0.0, counts.total());
}

}  // namespace detail

inline double vacuum_lower(const ClassCounts& counts, const IntensitySettings& in,
                           const ProtocolProbabilities& probs, const DecoyOptions& opts) {
  detail::check_settings(in, probs);
  const auto b = detail::bound_class(counts, opts);
  const double t0 = tau(0, in, probs);
  const double value = t0 / (in.nu - in.omega) *
                       (in.nu * std::exp(in.omega) * b.omega.lower / probs.p_omega -
                        in.omega * std::exp(in.nu) * b.nu.upper / probs.p_nu);
  return detail::clamp_to_class(value, counts);
}

inline double single_lower(const ClassCounts& counts, double s0_lower, const IntensitySettings& in,
                           const ProtocolProbabilities& probs, const DecoyOptions& opts) {
  detail::check_settings(in, probs);
  const auto b = detail::bound_class(counts, opts);
  const bool printed = opts.convention == BoundConvention::as_printed;
  const double n_nu = printed ? b.nu.upper : b.nu.lower;
  const double n_omega = printed ? b.omega.lower : b.omega.upper;
  const double t0 = tau(0, in, probs);
  const double t1 = tau(1, in, probs);
  const double nu2_omega2 = in.nu * in.nu - in.omega * in.omega;
  const double bracket =
      std::exp(in.nu) * n_nu / probs.p_nu - std::exp(in.omega) * n_omega / probs.p_omega +
      nu2_omega2 / (in.mu * in.mu) *
          (s0_lower / t0 - std::exp(in.mu) * b.mu.upper / probs.p_mu);
  const double value = in.mu * t1 / in.single_photon_denominator() * bracket;
  return detail::clamp_to_class(value, counts);
}

inline double single_upper(const ClassCounts& counts, const IntensitySettings& in,
                           const ProtocolProbabilities& probs, const DecoyOptions& opts) {
  detail::check_settings(in, probs);
  const auto b = detail::bound_class(counts, opts);
  const double t1 = tau(1, in, probs);
  double difference;
  if (opts.convention == BoundConvention::as_printed) {
    difference = b.nu.upper - b.omega.lower;
  } else {
    difference = std::exp(in.nu) * b.nu.upper / probs.p_nu -
                 std::exp(in.omega) * b.omega.lower / probs.p_omega;
  }
  return detail::clamp_to_class(t1 * difference / (in.nu - in.omega), counts);
}

/// All three bounds for one class. Consumes three two-sided count bounds.
inline PhotonNumberBounds estimate_class(const ClassCounts& counts, const IntensitySettings& in,
                                         const ProtocolProbabilities& probs,
                                         const DecoyOptions& opts, bool with_upper = true) {
  PhotonNumberBounds out;
  out.s0_lower = vacuum_lower(counts, in, probs, opts);
  out.s1_lower = single_lower(counts, out.s0_lower, in, probs, opts);
  if (with_upper) out.s1_upper = single_upper(counts, in, probs, opts);
  return out;
}

}  // namespace lossq
