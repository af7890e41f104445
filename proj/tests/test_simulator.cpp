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
#include <limits>

#include "lossq/simulator.hpp"
#include "oracles.hpp"

namespace lossq {
namespace {

const SystemParams kSys;

ChannelModel channel(double db) { return ChannelModel::from_system(kSys, db); }

TEST(Simulator, GainsFallWithAttenuation) {
  SimConfig cfg;
  double prev = std::numeric_limits<double>::infinity();
  for (double db : {0.0, 3.0, 10.0, 20.0}) {
    const auto rec = expected_counts(cfg, channel(db));
    EXPECT_LT(rec.n_z.mu, prev);
    prev = rec.n_z.mu;
  }
  const auto dark = expected_counts(cfg, channel(std::numeric_limits<double>::infinity()));
  // Dark counts only.
  const double y0 = kSys.y0;
  const double per_pulse = 1 - (1 - y0) * (1 - y0);
  const auto& p = cfg.probabilities;
  EXPECT_NEAR(dark.n_z.mu, cfg.total_pulses * p.p_mu * p.p_z * p.p_z * per_pulse,
              1e-9 * dark.n_z.mu);
}

TEST(Simulator, TailBinKeepsTotalsExact) {
  // Photon-number sum, tail included, equals the closed Poisson-mixture gain.
  SimConfig cfg;
  cfg.intensities = {0.9, 0.3, 1e-3};
  const auto ch = channel(0.0);
  const auto rec = expected_counts(cfg, ch);
  const auto& p = cfg.probabilities;
  const double y0 = kSys.y0;
  const double click = 1 - (1 - y0) * (1 - y0) * std::exp(-0.9 * ch.transmittance());
  EXPECT_NEAR(rec.n_z.mu, cfg.total_pulses * p.p_mu * p.p_z * p.p_z * click, 1e-9 * rec.n_z.mu);
}

TEST(Simulator, TruthMatchesEstimatorsForVanishingDecoys) {
  SimConfig cfg;
  cfg.total_pulses = 1e12;
  cfg.intensities = {0.3, 5e-4, 0.0};
  cfg.flaws = {0.013, 0.134, 0.030};
  AnalysisOptions asym;
  asym.finite_size = false;
  for (double db : {3.0, 10.0, 20.0}) {
    const auto sim = simulate(cfg, channel(db));
    const auto r = analyze(sim.record, cfg.flaws, kSys, SecurityBudget::from_total(1e-10), asym);
    EXPECT_NEAR(r.s0_lower / sim.truth.z_s0, 1.0, 1e-3) << db;
    EXPECT_NEAR(r.s1_lower / sim.truth.z_s1, 1.0, 1e-3) << db;
    EXPECT_NEAR(r.ex1_upper / sim.truth.phase_error, 1.0, 0.02) << db;
    EXPECT_GE(r.ex1_upper, sim.truth.phase_error * (1 - 1e-9)) << db;
  }
}

TEST(Simulator, ExactMismatchSinglesGiveTruePhaseError) {
  SimConfig cfg;
  cfg.flaws = {0.013, 0.134, 0.030};
  const auto sim = simulate(cfg, channel(6.0));
  MismatchSingles m;
  for (int s = 0; s < 2; ++s)
    for (int i = 0; i < 3; ++i) m.by_outcome[s][i] = Interval::point(sim.truth.mismatch_s1[s][i]);
  const auto v = virtual_singles(m, cfg.probabilities, cfg.flaws);
  EXPECT_NEAR(phase_error_upper(v).value, sim.truth.phase_error, 1e-9);
}

TEST(Simulator, PovmMatchesSinglePhotonOutcomes) {
  const auto ch = channel(4.0);
  const auto povm = single_photon_x_povm(ch);
  const auto basis = detail::bob_basis(true, ch.misalignment_e_d);
  for (StateLabel l : {StateLabel::zero_z, StateLabel::one_z, StateLabel::zero_x}) {
    const auto phi = prepare_state(SourceFlawModel{0.05, 0.1, 0.0}, l);
    const auto direct = detail::outcome_probabilities(
        {std::norm(overlap(basis.m0, phi)), std::norm(overlap(basis.m1, phi))}, ch.transmittance(),
        ch.dark_y0, 1, false);
    const DensityMatrix rho = projector(phi);
    for (int s = 0; s < 2; ++s) {
      const double z = (rho(0, 0) - rho(1, 1)).real(), x = 2 * rho(0, 1).real();
      const double via = povm.q[s][0] + z * povm.q[s][1] + x * povm.q[s][2];
      EXPECT_NEAR(via, direct[s], 1e-12);
    }
  }
}

TEST(Simulator, SiftingModelsScale) {
  SimConfig cfg;
  const auto ch = channel(5.0);
  const auto naive = expected_counts(cfg, ch);
  cfg.sifting = SiftingModel::alice_only;
  const auto alice = expected_counts(cfg, ch);
  cfg.sifting = SiftingModel::none;
  const auto none = expected_counts(cfg, ch);
  const double pz = cfg.probabilities.p_z;
  EXPECT_NEAR(alice.n_z.mu * pz, naive.n_z.mu, 1e-9 * naive.n_z.mu);
  EXPECT_NEAR(none.n_z.mu * pz * pz, naive.n_z.mu, 1e-9 * naive.n_z.mu);
  EXPECT_THROW(parse_sifting_model("both"), InvalidInput);
}

TEST(Simulator, SeedDeterminism) {
  SimConfig cfg;
  cfg.seed = 42;
  const auto a = sample_counts(cfg, channel(8.0));
  const auto b = sample_counts(cfg, channel(8.0));
  EXPECT_EQ(a.n_z.mu, b.n_z.mu);
  EXPECT_EQ(a.n_ex.nu, b.n_ex.nu);
  EXPECT_EQ(a.n_0x_given_z.omega, b.n_0x_given_z.omega);
  cfg.seed = 43;
  EXPECT_NE(sample_counts(cfg, channel(8.0)).n_z.mu, a.n_z.mu);
  EXPECT_NE(stream_seed(1, 0), stream_seed(1, 1));
  EXPECT_EQ(stream_seed(7, 3), stream_seed(7, 3));
}

TEST(Simulator, SampledMeanTracksExpected) {
  SimConfig cfg;
  cfg.total_pulses = 1e8;
  const auto ch = channel(10.0);
  const double expected = expected_counts(cfg, ch).n_x.nu;
  double sum = 0.0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    cfg.seed = stream_seed(99, t);
    sum += sample_counts(cfg, ch).n_x.nu;
  }
  // Standard error of the mean is sqrt(expected / trials).
  EXPECT_NEAR(sum / trials, expected, 5 * std::sqrt(expected / trials));
}

TEST(Simulator, Bb84XErrorRateClosedForm) {
  // No dark counts: the two detectors see independent Poisson light.
  SimConfig cfg;
  cfg.protocol = ProtocolKind::bb84;
  ChannelModel ch = channel(5.0);
  ch.dark_y0 = 0.0;
  const auto sim = simulate(cfg, ch);
  const double m = cfg.intensities.mu * ch.transmittance();
  const double right = std::exp(-m * (1 - kSys.e_d)), wrong = std::exp(-m * kSys.e_d);
  const double err = (1 - wrong) * right + 0.5 * (1 - wrong) * (1 - right);
  const double click = 1 - right * wrong;
  EXPECT_NEAR(sim.record.n_ex.mu / sim.record.n_x.mu, err / click, 1e-9);
}

TEST(Simulator, ChannelValidation) {
  EXPECT_THROW(ChannelModel({-1.0, 0.0, 0.0, 1.0}).validate(), InvalidInput);
  EXPECT_THROW(ChannelModel({0.0, 0.6, 0.0, 1.0}).validate(), InvalidInput);
  EXPECT_EQ(ChannelModel({std::numeric_limits<double>::infinity(), 0.0, 0.0, 1.0}).transmittance(), 0.0);
}

TEST(Simulator, CurveFallsWithDistance) {
  SimConfig cfg;
  cfg.flaws = SourceFlawModel::uniform(0.05);
  cfg.intensities = {0.5, 0.02, 1e-3};
  const auto curve =
      rate_vs_distance(cfg, kSys, {0, 10, 20, 30, 40}, SecurityBudget::from_total(1e-10));
  ASSERT_EQ(curve.size(), 5u);
  EXPECT_GT(curve.front().rate, 0.0);
  for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_LE(curve[i].rate, curve[i - 1].rate);
  EXPECT_EQ(curve[2].distance_km, 20.0);
}

TEST(Simulator, OptimizerBeatsItsGrid) {
  OptimizerOptions opt;
  opt.grid_mu = 3;
  opt.grid_nu = 2;
  opt.grid_p = 3;
  const auto r = optimize_parameters(kSys, channel(4.0), 1e10, SecurityBudget::from_total(1e-10),
                                     {0.013, 0.134, 0.030}, AnalysisKind::loss_tolerant, opt);
  EXPECT_GE(r.rate, r.best_grid_rate);
  EXPECT_GT(r.rate, 0.0);
  EXPECT_GT(r.evaluations, 0);
  EXPECT_NO_THROW(r.intensities.validate());
  EXPECT_NO_THROW(r.probabilities.validate());
}

TEST(Simulator, OptimizerRejectsEmptyBox) {
  OptimizerOptions opt;
  opt.box.mu_min = 0.8;
  opt.box.mu_max = 0.2;
  EXPECT_THROW(optimize_parameters(kSys, channel(4.0), 1e10, SecurityBudget::from_total(1e-10), {},
                                   AnalysisKind::loss_tolerant, opt),
               InvalidInput);
}

}  // namespace
}  // namespace lossq
