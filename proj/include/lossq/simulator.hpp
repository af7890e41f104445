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

// Weak-coherent-pulse forward model of the decoy protocol over a lossy
// channel with two threshold detectors, plus rate-vs-distance sweeps and a
// grid + coordinate-ascent parameter optimizer.
//
// Every count is resolved by photon number so the model can report the true
// vacuum and single-photon contributions that the estimators bound.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "lossq/core_model.hpp"
#include "lossq/decoy.hpp"
#include "lossq/error.hpp"
#include "lossq/gllp.hpp"
#include "lossq/key_rate.hpp"
#include "lossq/phase_error.hpp"

namespace lossq {

/// How basis choices scale the class counts.
enum class SiftingModel {
  naive,       ///< N * P_k * (Alice basis) * (Bob basis)
  alice_only,  ///< Bob's basis factor dropped
  none,        ///< both basis factors dropped
};

inline std::string_view to_string(SiftingModel m) {
  switch (m) {
    case SiftingModel::naive: return "naive";
    case SiftingModel::alice_only: return "alice-only";
    case SiftingModel::none: return "none";
  }
  return "?";
}

inline SiftingModel parse_sifting_model(std::string_view text) {
  if (text == "naive") return SiftingModel::naive;
  if (text == "alice-only" || text == "alice_only") return SiftingModel::alice_only;
  if (text == "none") return SiftingModel::none;
  throw InvalidInput("unknown sifting model '" + std::string(text) + "'");
}

enum class ProtocolKind { three_state, bb84 };
enum class SimMode { expected, sampled };
enum class AnalysisKind { loss_tolerant, gllp };

inline AnalysisKind parse_analysis_kind(std::string_view text) {
  if (text == "loss-tolerant" || text == "loss_tolerant") return AnalysisKind::loss_tolerant;
  if (text == "gllp") return AnalysisKind::gllp;
  throw InvalidInput("unknown analysis '" + std::string(text) + "'");
}

struct ChannelModel {
  double attenuation_db = 0.0;  ///< total, may be +infinity
  double misalignment_e_d = 0.0;
  double dark_y0 = 0.0;
  double eta_bob = 1.0;

  static ChannelModel from_system(const SystemParams& sys, double attenuation_db) {
    return {attenuation_db, sys.e_d, sys.y0, sys.eta_bob};
  }

  double transmittance() const {
    if (std::isinf(attenuation_db)) return 0.0;
    return eta_bob * std::pow(10.0, -attenuation_db / 10.0);
  }

  void validate() const {
    detail::require(attenuation_db >= 0.0, "attenuation must be nonnegative");
    detail::require(misalignment_e_d >= 0.0 && misalignment_e_d < 0.5, "e_d must lie in [0,0.5)");
    detail::require(dark_y0 >= 0.0 && dark_y0 < 1.0, "y0 must lie in [0,1)");
    detail::require(eta_bob > 0.0 && eta_bob <= 1.0, "eta_bob must lie in (0,1]");
  }
};

struct SimConfig {
  double total_pulses = 5e10;
  IntensitySettings intensities{0.5, 0.1, 1e-3};
  ProtocolProbabilities probabilities = ProtocolProbabilities::from_free(0.6, 0.3, 0.7);
  SourceFlawModel flaws;
  std::uint64_t seed = 1;
  SimMode mode = SimMode::expected;
  SiftingModel sifting = SiftingModel::naive;
  ProtocolKind protocol = ProtocolKind::three_state;

  void validate() const {
    detail::require(total_pulses > 0.0 && std::isfinite(total_pulses), "N must be positive");
    intensities.validate();
    probabilities.validate();
    flaws.validate();
  }
};

/// Model truth behind a simulated record.
struct SimulationTruth {
  ClassCounts z_vacuum_by_intensity;  ///< unused by estimators; kept for inspection
  double z_s0 = 0.0;
  double z_s1 = 0.0;
  /// [bob outcome j][0z, 1z, 0x] single-photon counts of the mismatch classes.
  std::array<std::array<double, 3>, 2> mismatch_s1{};
  double x_s1 = 0.0;
  double x_errors_s1 = 0.0;
  double phase_error = 0.0;  ///< exact single-photon phase-error rate
  double y1 = 0.0;           ///< single-photon detection probability
};

struct SimulatedRecord {
  CountsRecord record;
  SimulationTruth truth;
};

namespace detail {

inline constexpr int kMaxPhotons = 14;  // last bin holds the Poisson tail

struct BornBasis {
  PureQubitState m0, m1;
};

// Bob's basis rotated by the misalignment angle, sin^2(theta) = e_d.
inline BornBasis bob_basis(bool x_basis, double e_d) {
  const double th = std::asin(std::sqrt(e_d));
  const double c = std::cos(th), s = std::sin(th);
  const double r = std::numbers::sqrt2 / 2.0;
  auto rot = [&](double a0, double a1) -> PureQubitState {
    return {c * a0 - s * a1, s * a0 + c * a1};
  };
  if (!x_basis) return {rot(1.0, 0.0), rot(0.0, 1.0)};
  return {rot(r, r), rot(r, -r)};
}

// Probability that a pulse of exactly n photons (or, with `poisson`, a
// Poisson(n_or_mean) pulse) yields outcome s after random assignment of
// double clicks.
inline std::array<double, 2> outcome_probabilities(std::array<double, 2> born, double eta,
                                                   double y0, double n_or_mean, bool poisson) {
  auto survive = [&](double p) {  // no photon reaches a detector with weight p
    return poisson ? std::exp(-n_or_mean * eta * p) : std::pow(1.0 - eta * p, n_or_mean);
  };
  const double none0 = (1 - y0) * survive(born[0]);
  const double none1 = (1 - y0) * survive(born[1]);
  const double none_both = (1 - y0) * (1 - y0) * survive(born[0] + born[1]);
  const double only0 = none1 - none_both;
  const double only1 = none0 - none_both;
  const double both = 1.0 - none0 - none1 + none_both;
  return {only0 + 0.5 * both, only1 + 0.5 * both};
}

inline double poisson_pmf(double mean, int n) {
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
}

struct StateSpec {
  StateLabel label;
  int bit;
  bool x_basis;
  double weight_in_basis;
};

inline std::vector<StateSpec> alice_states(ProtocolKind p) {
  std::vector<StateSpec> out{{StateLabel::zero_z, 0, false, 0.5},
                             {StateLabel::one_z, 1, false, 0.5}};
  if (p == ProtocolKind::three_state) {
    out.push_back({StateLabel::zero_x, 0, true, 1.0});
  } else {
    out.push_back({StateLabel::zero_x, 0, true, 0.5});
    out.push_back({StateLabel::one_x, 1, true, 0.5});
  }
  return out;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline double draw_poisson(double mean, std::mt19937_64& rng) {
  if (!(mean > 0.0)) return 0.0;
  std::poisson_distribution<long long> dist(mean);
  return static_cast<double>(dist(rng));
}

}  // namespace detail

/// Counter-based stream seed: independent of evaluation order.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return detail::splitmix64(seed ^ detail::splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Bob's effective single-photon X-basis POVM, dark counts and random
/// double-click assignment included.
inline BobPovm single_photon_x_povm(const ChannelModel& ch) {
  const double eta = ch.transmittance();
  const double y0 = ch.dark_y0;
  const detail::BornBasis basis = detail::bob_basis(true, ch.misalignment_e_d);
  const double offset = (1 - eta) * y0 * (1 - y0) + 0.5 * (eta * y0 + (1 - eta) * y0 * y0);
  const DensityMatrix id = DensityMatrix::Identity();
  const DensityMatrix d0 = eta * (1 - y0) * projector(basis.m0) + offset * id;
  const DensityMatrix d1 = eta * (1 - y0) * projector(basis.m1) + offset * id;
  return BobPovm::from_operators(d0, d1);
}

/// Expected (or, in sampled mode, Poisson-sampled) counts with model truth.
inline SimulatedRecord simulate(const SimConfig& cfg, const ChannelModel& ch) {
  cfg.validate();
  ch.validate();
  const double eta = ch.transmittance();
  const auto& probs = cfg.probabilities;
  std::mt19937_64 rng(cfg.seed);
  const bool sampled = cfg.mode == SimMode::sampled;

  SimulatedRecord out;
  CountsRecord& rec = out.record;
  rec.total_pulses = cfg.total_pulses;
  rec.intensities = cfg.intensities;
  rec.probabilities = probs;
  ResolvedMismatch resolved;
  SimulationTruth& truth = out.truth;

  for (const auto& st : detail::alice_states(cfg.protocol)) {
    const PureQubitState phi = prepare_state(cfg.flaws, st.label);
    const double alice_basis = st.x_basis ? probs.p_x : probs.p_z;
    for (bool bob_x : {false, true}) {
      // Only Z-Z, X-X and Z-X (rejected) events enter the record.
      if (st.x_basis && !bob_x) continue;
      const double bob_basis = bob_x ? probs.p_x : probs.p_z;
      double selection = st.weight_in_basis;
      if (cfg.sifting != SiftingModel::none) selection *= alice_basis;
      if (cfg.sifting == SiftingModel::naive) selection *= bob_basis;

      const detail::BornBasis basis = detail::bob_basis(bob_x, ch.misalignment_e_d);
      const std::array<double, 2> born{std::norm(overlap(basis.m0, phi)),
                                        std::norm(overlap(basis.m1, phi))};
      for (Intensity k : kIntensities) {
        const double mean = cfg.intensities.at(k);
        const double pulses = cfg.total_pulses * probs.at(k) * selection;
        const auto closed = detail::outcome_probabilities(born, eta, ch.dark_y0, mean, true);
        for (int s = 0; s < 2; ++s) {
          double counted = 0.0, vacuum = 0.0, single = 0.0, mass = 0.0;
          for (int n = 0; n <= detail::kMaxPhotons; ++n) {
            double expected;
            if (n < detail::kMaxPhotons) {
              const double w = detail::poisson_pmf(mean, n);
              expected = pulses * w *
                         detail::outcome_probabilities(born, eta, ch.dark_y0, n, false)[s];
              mass += expected;
            } else {
              expected = std::max(0.0, pulses * closed[s] - mass);  // tail bin
            }
            const double c = sampled ? detail::draw_poisson(expected, rng) : expected;
            counted += c;
            if (n == 0) vacuum = c;
            if (n == 1) single = c;
          }
          const bool error = s != st.bit;
          if (!st.x_basis && !bob_x) {
            rec.n_z.at(k) += counted;
            if (error) rec.n_ez.at(k) += counted;
            truth.z_s0 += vacuum;
            truth.z_s1 += single;
            truth.z_vacuum_by_intensity.at(k) += vacuum;
          } else if (st.x_basis) {
            rec.n_x.at(k) += counted;
            if (error) rec.n_ex.at(k) += counted;
            if (cfg.protocol == ProtocolKind::three_state) truth.mismatch_s1[s][2] += single;
            truth.x_s1 += single;
            if (error) truth.x_errors_s1 += single;
          } else {
            const int i = st.label == StateLabel::zero_z ? 0 : 1;
            (s == 0 ? rec.n_0x_given_z : rec.n_1x_given_z).at(k) += counted;
            ClassCounts& dst = i == 0 ? (s == 0 ? resolved.n_0x_given_0z : resolved.n_1x_given_0z)
                                      : (s == 0 ? resolved.n_0x_given_1z : resolved.n_1x_given_1z);
            dst.at(k) += counted;
            truth.mismatch_s1[s][i] += single;
          }
        }
      }
    }
  }
  rec.resolved = resolved;

  const auto yields = asymptotic_yield_oracle(cfg.flaws, single_photon_x_povm(ch));
  truth.phase_error = yields.phase_error;
  const auto z_basis = detail::bob_basis(false, ch.misalignment_e_d);
  const auto y1 = detail::outcome_probabilities(
      {std::norm(z_basis.m0.amplitude0), std::norm(z_basis.m1.amplitude0)}, eta, ch.dark_y0, 1,
      false);
  truth.y1 = y1[0] + y1[1];
  return out;
}

inline CountsRecord expected_counts(SimConfig cfg, const ChannelModel& ch) {
  cfg.mode = SimMode::expected;
  return simulate(cfg, ch).record;
}

inline CountsRecord sample_counts(SimConfig cfg, const ChannelModel& ch) {
  cfg.mode = SimMode::sampled;
  return simulate(cfg, ch).record;
}

struct CurvePoint {
  double distance_km = 0.0;
  double rate = 0.0;
  double key_length = 0.0;
  double s0 = 0.0;
  double s1 = 0.0;
  double ex1 = 0.0;
  double qber = 0.0;
};

/// One analysis of a record under the chosen security analysis. With
/// `single_photon_guard`, a key whose single-photon term s1 (q - h(e)) is not
/// positive counts as zero: the leak term charges only signal-intensity
/// counts, so dark-count vacuum events alone can otherwise show a key.
inline CurvePoint evaluate_record(const CountsRecord& rec, AnalysisKind kind,
                                  const SourceFlawModel& flaws, const SystemParams& sys,
                                  const SecurityBudget& budget, const AnalysisOptions& opts,
                                  bool single_photon_guard = false) {
  CurvePoint p;
  double single_term = 0.0;
  if (kind == AnalysisKind::loss_tolerant) {
    const KeyRateReport r = analyze(rec, flaws, sys, budget, opts);
    p = {0.0, r.rate, r.key_length, r.s0_lower, r.s1_lower, r.ex1_upper, r.qber_z};
    single_term = r.s1_lower * (r.q_used - binary_entropy(r.ex1_upper));
  } else {
    const GllpReport r = analyze_gllp(rec, flaws, sys, budget, opts);
    p = {0.0, r.rate, r.key_length, r.s0_lower, r.s1_lower, r.ex1_corrected, r.qber_z};
    single_term = r.s1_lower * (1.0 - binary_entropy(r.ex1_corrected));
  }
  if (single_photon_guard && !(single_term > 0.0)) {
    p.rate = 0.0;
    p.key_length = 0.0;
  }
  return p;
}

/// Predicted rate of a parameter point on a channel; the GLLP analysis runs
/// on a four-state record.
inline CurvePoint predict(SimConfig cfg, const ChannelModel& ch, AnalysisKind kind,
                          const SystemParams& sys, const SecurityBudget& budget,
                          const AnalysisOptions& opts, bool single_photon_guard = false) {
  cfg.protocol = kind == AnalysisKind::gllp ? ProtocolKind::bb84 : ProtocolKind::three_state;
  return evaluate_record(simulate(cfg, ch).record, kind, cfg.flaws, sys, budget, opts,
                         single_photon_guard);
}

struct SearchBox {
  double mu_min = 0.1;
  double mu_max = 1.0;
  double nu_min = 0.01;
  double nu_max_fraction = 0.5;  ///< nu <= fraction * mu
  double omega = 1e-3;
  double p_min = 0.05;
  double p_max = 0.95;
};

struct OptimizerOptions {
  SearchBox box;
  int grid_mu = 7;
  int grid_nu = 4;
  int grid_p = 5;
  int max_iterations = 100;
  double tolerance = 1e-6;
  bool single_photon_guard = true;
};

struct OptimizationResult {
  IntensitySettings intensities;
  ProtocolProbabilities probabilities;
  double rate = 0.0;
  double best_grid_rate = 0.0;
  int evaluations = 0;
  int iterations = 0;
};

namespace detail {

struct ParamPoint {
  std::array<double, 5> x{};  // mu, nu, p_mu, p_nu, p_z
};

inline bool feasible(const ParamPoint& p, const SearchBox& b) {
  const auto& [mu, nu, pm, pn, pz] = p.x;
  if (mu < b.mu_min || mu > b.mu_max) return false;
  if (nu < b.nu_min || nu > b.nu_max_fraction * mu || nu <= b.omega) return false;
  for (double q : {pm, pn, pz}) {
    if (q < b.p_min || q > b.p_max) return false;
  }
  if (1.0 - pm - pn < b.p_min) return false;
  IntensitySettings in{mu, nu, b.omega};
  return in.single_photon_denominator() > 0.0;
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  if (n <= 1) return {0.5 * (lo + hi)};
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace detail

/// Grid search followed by coordinate ascent on the predicted rate.
inline OptimizationResult optimize_parameters(const SystemParams& sys, const ChannelModel& ch,
                                              double total_pulses, const SecurityBudget& budget,
                                              const SourceFlawModel& flaws,
                                              AnalysisKind kind = AnalysisKind::loss_tolerant,
                                              const OptimizerOptions& opt = {},
                                              const AnalysisOptions& analysis = {}) {
  const SearchBox& box = opt.box;
  detail::require(box.mu_min <= box.mu_max && box.mu_min > 0.0, "empty feasible region: mu range");
  detail::require(std::max(box.nu_min, box.omega) < box.nu_max_fraction * box.mu_max,
                  "empty feasible region: nu range");
  detail::require(box.p_min < box.p_max && 3.0 * box.p_min < 1.0,
                  "empty feasible region: probabilities");

  OptimizationResult res;
  auto evaluate = [&](const detail::ParamPoint& p) {
    ++res.evaluations;
    SimConfig cfg;
    cfg.total_pulses = total_pulses;
    cfg.intensities = {p.x[0], p.x[1], box.omega};
    cfg.probabilities = ProtocolProbabilities::from_free(p.x[2], p.x[3], p.x[4]);
    cfg.flaws = flaws;
    return predict(cfg, ch, kind, sys, budget, analysis, opt.single_photon_guard).rate;
  };

  detail::ParamPoint best;
  double best_rate = -1.0;
  for (double mu : detail::linspace(box.mu_min, box.mu_max, opt.grid_mu)) {
    const double nu_hi = box.nu_max_fraction * mu;
    const double nu_lo = std::max(box.nu_min, 2.0 * box.omega);
    if (nu_lo > nu_hi) continue;
    for (double nu : detail::linspace(nu_lo, nu_hi, opt.grid_nu)) {
      for (double pm : detail::linspace(box.p_min, box.p_max, opt.grid_p)) {
        for (double pn : detail::linspace(box.p_min, box.p_max, opt.grid_p)) {
          for (double pz : detail::linspace(box.p_min, box.p_max, opt.grid_p)) {
            const detail::ParamPoint p{{mu, nu, pm, pn, pz}};
            if (!detail::feasible(p, box)) continue;
            const double r = evaluate(p);
            if (r > best_rate) {
              best_rate = r;
              best = p;
            }
          }
        }
      }
    }
  }
  if (best_rate < 0.0) throw InvalidInput("empty feasible region: no grid point is feasible");
  res.best_grid_rate = best_rate;

  std::array<double, 5> step{(box.mu_max - box.mu_min) / (2.0 * opt.grid_mu),
                             0.25 * box.nu_max_fraction * box.mu_max / opt.grid_nu,
                             (box.p_max - box.p_min) / (2.0 * opt.grid_p),
                             (box.p_max - box.p_min) / (2.0 * opt.grid_p),
                             (box.p_max - box.p_min) / (2.0 * opt.grid_p)};
  constexpr double kMinStep = 1e-5;
  for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
    const double start = best_rate;
    for (int c = 0; c < 5; ++c) {
      for (double sign : {+1.0, -1.0}) {
        detail::ParamPoint trial = best;
        trial.x[c] += sign * step[c];
        if (!detail::feasible(trial, box)) continue;
        const double r = evaluate(trial);
        if (r > best_rate) {
          best_rate = r;
          best = trial;
          break;
        }
      }
    }
    const double gain = best_rate - start;
    if (gain <= opt.tolerance * std::max(std::abs(start), std::numeric_limits<double>::min())) {
      for (double& s : step) s *= 0.5;
      if (*std::max_element(step.begin(), step.end()) < kMinStep) break;
    }
  }
  res.intensities = {best.x[0], best.x[1], box.omega};
  res.probabilities = ProtocolProbabilities::from_free(best.x[2], best.x[3], best.x[4]);
  res.rate = best_rate;
  return res;
}

struct SweepOptions {
  double db_per_km = 0.2;
  AnalysisKind kind = AnalysisKind::loss_tolerant;
  bool optimize_each = false;
  bool single_photon_guard = true;
  OptimizerOptions optimizer;
  AnalysisOptions analysis;
};

/// Rate versus distance. Sampled configurations draw each point from its own
/// counter-based stream, so results do not depend on evaluation order.
inline std::vector<CurvePoint> rate_vs_distance(const SimConfig& cfg, const SystemParams& sys,
                                                const std::vector<double>& distances_km,
                                                const SecurityBudget& budget,
                                                const SweepOptions& opts = {}) {
  detail::require(opts.db_per_km >= 0.0, "fiber loss must be nonnegative");
  std::vector<CurvePoint> curve;
  curve.reserve(distances_km.size());
  for (std::size_t i = 0; i < distances_km.size(); ++i) {
    const double d = distances_km[i];
    detail::require(d >= 0.0, "distance must be nonnegative");
    const ChannelModel ch = ChannelModel::from_system(sys, opts.db_per_km * d);
    SimConfig point = cfg;
    point.seed = stream_seed(cfg.seed, i);
    if (opts.optimize_each) {
      const auto best = optimize_parameters(sys, ch, cfg.total_pulses, budget, cfg.flaws,
                                            opts.kind, opts.optimizer, opts.analysis);
      point.intensities = best.intensities;
      point.probabilities = best.probabilities;
    }
    CurvePoint p = predict(point, ch, opts.kind, sys, budget, opts.analysis, opts.single_photon_guard);
    p.distance_km = d;
    curve.push_back(p);
  }
  return curve;
}

}  // namespace lossq
