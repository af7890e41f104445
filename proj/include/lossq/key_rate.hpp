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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lossq/core_model.hpp"
#include "lossq/decoy.hpp"
#include "lossq/error.hpp"
#include "lossq/phase_error.hpp"
#include "lossq/stats_bounds.hpp"

namespace lossq {

/// Mismatch counts (Alice Z, Bob X) resolved per Alice state.
struct ResolvedMismatch {
  ClassCounts n_0x_given_0z;
  ClassCounts n_1x_given_0z;
  ClassCounts n_0x_given_1z;
  ClassCounts n_1x_given_1z;
};

/// Published values a record can be compared against.
struct PublishedReference {
  std::string source;
  std::optional<double> s0_lower;
  std::optional<double> s1_lower;
  std::optional<double> ex1_upper;
  std::optional<double> qber_z;
  std::optional<double> key_length;
  std::optional<double> rate;
};

/// Detection counts of one run.
struct CountsRecord {
  ClassCounts n_z;   ///< both Z
  ClassCounts n_x;   ///< both X
  ClassCounts n_ez;  ///< Z-basis errors
  ClassCounts n_ex;  ///< X-basis errors
  ClassCounts n_0x_given_z;
  ClassCounts n_1x_given_z;
  std::optional<ResolvedMismatch> resolved;
  double total_pulses = 0.0;
  IntensitySettings intensities;
  ProtocolProbabilities probabilities;
  std::optional<PublishedReference> reference;

  double total_detections() const {
    return n_z.total() + n_x.total() + n_0x_given_z.total() + n_1x_given_z.total();
  }

  void validate() const {
    for (const ClassCounts* c : {&n_z, &n_x, &n_ez, &n_ex, &n_0x_given_z, &n_1x_given_z}) {
      c->validate();
    }
    for (Intensity k : kIntensities) {
      detail::require(n_ez.at(k) <= n_z.at(k), "Z error counts exceed Z gain counts");
      detail::require(n_ex.at(k) <= n_x.at(k), "X error counts exceed X gain counts");
    }
    if (resolved) {
      for (const ClassCounts* c : {&resolved->n_0x_given_0z, &resolved->n_1x_given_0z,
                                   &resolved->n_0x_given_1z, &resolved->n_1x_given_1z}) {
        c->validate();
      }
    }
    detail::require(std::isfinite(total_pulses) && total_pulses > 0.0,
                    "total_pulses must be positive");
    detail::require(total_pulses >= total_detections(),
                    "total_pulses is smaller than the number of detections");
    intensities.validate();
    probabilities.validate();
  }
};

struct AnalysisOptions {
  BoundConvention convention = BoundConvention::conservative;
  bool finite_size = true;
  std::optional<double> q_override;  ///< pin q instead of deriving it from the flaws
  double reference_tolerance = 0.10;  ///< relative gap that raises a reference flag
};

struct KeyRateReport {
  double s0_lower = 0.0;
  double s1_lower = 0.0;
  double s1_upper = 0.0;
  double ex1_upper = 0.5;
  double qber_z = 0.0;
  double leak_ec = 0.0;
  double epsilon_cost = 0.0;
  double key_length = 0.0;
  double rate = 0.0;
  double q_used = 0.0;
  double total_pulses = 0.0;
  SecurityBudget budget;
  int concentration_uses = 0;
  double eps_consumed = 0.0;
  PhotonNumberBounds z_bounds;
  MismatchSingles mismatch;
  std::optional<VirtualSingles> virtual_counts;
  std::vector<std::string> flags;
  std::map<std::string, std::string> assumptions;

  bool key_produced() const { return key_length > 0.0; }
  bool has_flag(const std::string& prefix) const {
    return std::any_of(flags.begin(), flags.end(),
                       [&](const std::string& f) { return f.rfind(prefix, 0) == 0; });
  }
};

inline double qber_z(const CountsRecord& counts) {
  detail::require(counts.n_z.mu > 0.0, "signal Z gain is zero; QBER undefined");
  return counts.n_ez.mu / counts.n_z.mu;
}

inline double ec_leakage(double n_z_mu, double e_z, double f_e) {
  detail::require(f_e >= 1.0, "f_e must be at least 1");
  detail::require(n_z_mu >= 0.0, "gain count must be nonnegative");
  return n_z_mu * f_e * binary_entropy(e_z);
}

/// 6 log2(21/eps_sec) + log2(2/eps_corr).
inline double epsilon_cost_bits(const SecurityBudget& budget) {
  return 6.0 * std::log2(kConcentrationSlots / budget.eps_sec) + std::log2(2.0 / budget.eps_corr);
}

/// Key length with the vacuum term entering at coefficient one. The
/// single-photon term may be negative when h(e) > q.
inline double secret_key_length(double s0_lower, double s1_lower, double ex1_upper, double q,
                                double leak_ec, const SecurityBudget& budget) {
  detail::require(ex1_upper >= 0.0 && ex1_upper <= 0.5, "phase error bound must lie in [0,1/2]");
  const double raw = s0_lower + s1_lower * (q - binary_entropy(ex1_upper)) - leak_ec -
                     epsilon_cost_bits(budget);
  return std::max(0.0, raw);
}

namespace detail {

inline std::string percent(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline void compare_reference(const std::string& name, double got, std::optional<double> published,
                              double tol, std::vector<std::string>& flags) {
  if (!published) return;
  const double scale = std::max(std::abs(*published), 1e-300);
  if (std::abs(got - *published) / scale > tol) {
    flags.push_back("reference-mismatch: " + name + " computed " + percent(got) +
                    " vs published " + percent(*published));
  }
}

inline Interval single_interval(const PhotonNumberBounds& b) {
  return {b.s1_lower, std::max(b.s1_lower, b.s1_upper.value_or(b.s1_lower))};
}

}  // namespace detail

/// Full loss-tolerant analysis of one counts record.
inline KeyRateReport analyze(const CountsRecord& counts, const SourceFlawModel& flaws,
                             const SystemParams& system, const SecurityBudget& budget,
                             const AnalysisOptions& options = {}) {
  try {
    counts.validate();
    flaws.validate();
    system.validate();
    budget.validate();
  } catch (const InvalidInput& e) {
    throw InvalidInput(std::string("analyze/input: ") + e.what());
  }
  KeyRateReport r;
  r.budget = budget;
  r.total_pulses = counts.total_pulses;
  const auto& in = counts.intensities;
  const auto& probs = counts.probabilities;
  const DecoyOptions decoy{budget.eps_bound, options.finite_size, options.convention};

  r.assumptions["bound_convention"] = std::string(to_string(options.convention));
  r.assumptions["deviation"] = options.finite_size ? "hoeffding per intensity setting"
                                                   : "disabled (asymptotic)";
  r.assumptions["eps_split"] = "eps_sec = eps_corr = eps_tot/2; eps_bound = eps_sec/42 per side";
  r.assumptions["f_e"] = detail::percent(system.f_e);

  if (options.q_override) {
    detail::require(*options.q_override > 0.0 && *options.q_override <= 1.0,
                    "q override must lie in (0,1]");
    r.q_used = *options.q_override;
    r.assumptions["q"] = "pinned override";
  } else {
    r.q_used = quality_q(flaws);
    r.assumptions["q"] = "derived from source flaws (max Z/X overlap)";
  }

  r.z_bounds = estimate_class(counts.n_z, in, probs, decoy);
  r.s0_lower = r.z_bounds.s0_lower;
  r.s1_lower = r.z_bounds.s1_lower;
  r.s1_upper = r.z_bounds.s1_upper.value_or(0.0);
  r.concentration_uses += 3;

  ResolvedMismatch split;
  if (counts.resolved) {
    split = *counts.resolved;
    r.assumptions["mismatch_split"] = "resolved per Alice state";
  } else {
    split = {0.5 * counts.n_0x_given_z, 0.5 * counts.n_1x_given_z, 0.5 * counts.n_0x_given_z,
             0.5 * counts.n_1x_given_z};
    r.flags.push_back("approximate-split: mismatch counts divided evenly between 0z and 1z");
    r.assumptions["mismatch_split"] = "even split of per-basis aggregates";
  }
  const std::array<std::array<ClassCounts, 3>, 2> classes{{
      {split.n_0x_given_0z, split.n_0x_given_1z, counts.n_x - counts.n_ex},
      {split.n_1x_given_0z, split.n_1x_given_1z, counts.n_ex},
  }};
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 3; ++i) {
      r.mismatch.by_outcome[j][i] =
          detail::single_interval(estimate_class(classes[j][i], in, probs, decoy));
      r.concentration_uses += 3;
    }
  }
  r.eps_consumed = options.finite_size ? budget.consumed(r.concentration_uses, false) : 0.0;
  if (r.eps_consumed > budget.eps_tot * (1.0 + 1e-12)) {
    throw InvalidInput("analyze/budget: consumed failure probability exceeds eps_tot");
  }

  bool estimation_ok = true;
  try {
    r.virtual_counts = virtual_singles(r.mismatch, probs, flaws);
    if (r.virtual_counts->clamped) {
      r.flags.push_back("virtual-bounds-clamped: a propagated virtual bound was negative");
    }
    const PhaseErrorEstimate pe = phase_error_upper(*r.virtual_counts);
    r.ex1_upper = pe.value;
    if (pe.saturated) r.flags.push_back("phase-error-saturated: e_x1^U clamped to 1/2");
  } catch (const EstimationFailure& e) {
    estimation_ok = false;
    r.ex1_upper = 0.5;
    r.flags.push_back(std::string("estimation-failed: ") + e.what());
  }

  if (counts.n_z.mu > 0.0) {
    r.qber_z = qber_z(counts);
  } else {
    estimation_ok = false;
    r.qber_z = 0.0;
    r.flags.push_back("estimation-failed: key-rate: signal Z gain is zero");
  }
  r.leak_ec = ec_leakage(counts.n_z.mu, r.qber_z, system.f_e);
  r.epsilon_cost = epsilon_cost_bits(budget);
  r.key_length = estimation_ok ? secret_key_length(r.s0_lower, r.s1_lower, r.ex1_upper, r.q_used,
                                                   r.leak_ec, budget)
                               : 0.0;
  r.rate = r.key_length / counts.total_pulses;
  if (!r.key_produced()) r.flags.push_back("no-key: certified key length is zero");

  if (counts.reference) {
    const auto& ref = *counts.reference;
    const double tol = options.reference_tolerance;
    detail::compare_reference("s0_lower", r.s0_lower, ref.s0_lower, tol, r.flags);
    detail::compare_reference("s1_lower", r.s1_lower, ref.s1_lower, tol, r.flags);
    detail::compare_reference("ex1_upper", r.ex1_upper, ref.ex1_upper, tol, r.flags);
    detail::compare_reference("qber_z", r.qber_z, ref.qber_z, tol, r.flags);
    detail::compare_reference("key_length", r.key_length, ref.key_length, tol, r.flags);
    detail::compare_reference("rate", r.rate, ref.rate, tol, r.flags);
  }
  return r;
}

}  // namespace lossq
