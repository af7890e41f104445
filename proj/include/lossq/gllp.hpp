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

// GLLP baseline: basis-dependent flaws are charged through the quantum-coin
// imbalance, which loss amplifies by 1/Y1.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lossq/core_model.hpp"
#include "lossq/decoy.hpp"
#include "lossq/key_rate.hpp"

namespace lossq {

struct QuantumCoin {
  double delta_imbalance = 0.0;
  double delta_prime = 0.0;
  double y1 = 1.0;
};

inline double coin_imbalance(const SourceFlawModel& flaws) {
  return (1.0 - basis_fidelity(flaws)) / 2.0;
}

inline double coin_loss_amplified(double delta, double y1) {
  detail::require(delta >= 0.0, "coin imbalance must be nonnegative");
  detail::require(y1 <= 1.0, "single-photon yield must not exceed 1");
  if (!(y1 > 0.0)) throw InvalidInput("no single-photon detections (Y1 = 0)");
  return std::min(1.0, delta / y1);
}

struct GllpPhaseError {
  double value = 0.0;
  bool saturated = false;
};

inline GllpPhaseError gllp_phase_error(double ex1, double delta_prime, double eps_ph) {
  detail::require(ex1 >= 0.0 && ex1 <= 1.0, "phase error must lie in [0,1]");
  detail::require(delta_prime >= 0.0 && delta_prime <= 1.0, "delta' must lie in [0,1]");
  detail::require(eps_ph >= 0.0 && eps_ph < 1.0, "eps_ph must lie in [0,1)");
  const double raw = ex1 + 4.0 * delta_prime + 4.0 * std::sqrt(delta_prime * ex1) + eps_ph;
  return {std::min(raw, 0.5), raw > 0.5};
}

/// Key length with the coin-corrected phase error and q = 1.
inline double gllp_key_length(double s0_lower, double s1_lower, double ex1, double delta_prime,
                              double leak_ec, const SecurityBudget& budget) {
  const GllpPhaseError e = gllp_phase_error(ex1, delta_prime, budget.eps_ph);
  return secret_key_length(s0_lower, s1_lower, e.value, 1.0, leak_ec, budget);
}

struct GllpReport {
  double s0_lower = 0.0;
  double s1_lower = 0.0;
  double ex1_upper = 0.5;  ///< before the coin correction
  double ex1_corrected = 0.5;
  double qber_z = 0.0;
  double leak_ec = 0.0;
  QuantumCoin coin;
  double key_length = 0.0;
  double rate = 0.0;
  std::vector<std::string> flags;
};

/// GLLP analysis of a record. The single-photon phase error comes from the
/// X-basis decoy estimate; Y1 is s1^L over the estimated number of Z-sifted
/// single-photon pulses N * P_z^2 * tau_1.
inline GllpReport analyze_gllp(const CountsRecord& counts, const SourceFlawModel& flaws,
                               const SystemParams& system, const SecurityBudget& budget,
                               const AnalysisOptions& options = {}) {
  counts.validate();
  flaws.validate();
  system.validate();
  budget.validate();
  const auto& in = counts.intensities;
  const auto& probs = counts.probabilities;
  const DecoyOptions decoy{budget.eps_bound, options.finite_size, options.convention};

  GllpReport r;
  const PhotonNumberBounds z = estimate_class(counts.n_z, in, probs, decoy, false);
  r.s0_lower = z.s0_lower;
  r.s1_lower = z.s1_lower;

  const PhotonNumberBounds x = estimate_class(counts.n_x, in, probs, decoy, false);
  const double errors_upper = single_upper(counts.n_ex, in, probs, decoy);
  if (x.s1_lower > 0.0) {
    r.ex1_upper = std::min(0.5, errors_upper / x.s1_lower);
  } else {
    r.flags.push_back("estimation-failed: no X-basis single-photon detections");
  }

  r.coin.delta_imbalance = coin_imbalance(flaws);
  const double single_pulses =
      counts.total_pulses * probs.p_z * probs.p_z * tau(1, in, probs);
  r.coin.y1 = std::min(1.0, r.s1_lower / single_pulses);
  bool ok = x.s1_lower > 0.0 && counts.n_z.mu > 0.0;
  if (r.coin.y1 > 0.0) {
    r.coin.delta_prime = coin_loss_amplified(r.coin.delta_imbalance, r.coin.y1);
  } else {
    ok = false;
    r.coin.delta_prime = 1.0;
    r.flags.push_back("estimation-failed: no single-photon detections");
  }
  const GllpPhaseError e = gllp_phase_error(r.ex1_upper, r.coin.delta_prime, budget.eps_ph);
  r.ex1_corrected = e.value;
  if (e.saturated) r.flags.push_back("phase-error-saturated: no key");

  r.qber_z = counts.n_z.mu > 0.0 ? qber_z(counts) : 0.0;
  r.leak_ec = ec_leakage(counts.n_z.mu, r.qber_z, system.f_e);
  r.key_length = ok ? secret_key_length(r.s0_lower, r.s1_lower, r.ex1_corrected, 1.0, r.leak_ec,
                                        budget)
                    : 0.0;
  r.rate = r.key_length / counts.total_pulses;
  return r;
}

}  // namespace lossq
