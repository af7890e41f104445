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

// lossq: analyze | calibrate | simulate | optimize | audit
// exit codes: 0 ok, 1 input error, 2 no key

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lossq/lossq.hpp"

namespace {

using lossq::io::Json;
using lossq::io::Reader;

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNoKey = 2;

struct Flags {
  std::string counts;
  std::string calibration;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> eps_total;
  std::optional<std::string> sifting;
  std::string convention = "conservative";
  std::string q = "derived";
  std::string analysis = "loss-tolerant";
  bool asymptotic = false;
};

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    lossq::io::write_text(out, text);
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::optional<Json> config_doc(const Flags& f) {
  if (f.config.empty()) return std::nullopt;
  Json doc = lossq::io::load_json(f.config);
  lossq::io::check_version(doc, f.config);
  return doc;
}

lossq::SecurityBudget budget_from(const Flags& f, const std::optional<Reader>& cfg,
                                  std::vector<std::string>& defaulted) {
  double eps = 1e-10;
  if (f.eps_total) {
    eps = *f.eps_total;
  } else if (cfg && cfg->has("eps_total")) {
    eps = cfg->number("eps_total");
  } else {
    defaulted.push_back("eps_total = 1e-10");
  }
  return lossq::SecurityBudget::from_total(eps);
}

lossq::AnalysisOptions analysis_options(const Flags& f) {
  lossq::AnalysisOptions o;
  o.convention = lossq::parse_bound_convention(f.convention);
  o.finite_size = !f.asymptotic;
  if (f.q != "derived") {
    try {
      o.q_override = lossq::io::parse_double(f.q);
    } catch (const lossq::InvalidInput&) {
      throw lossq::InvalidInput("--q must be 'derived' or a number");
    }
  }
  return o;
}

int cmd_analyze(const Flags& f) {
  if (f.counts.empty()) throw lossq::InvalidInput("analyze needs --counts");
  lossq::io::CountsFile counts = lossq::io::load_counts(f.counts);
  const auto cfg_doc = config_doc(f);
  std::optional<Reader> cfg;
  if (cfg_doc) cfg.emplace(*cfg_doc, "config", &counts.defaulted);

  std::optional<lossq::SourceFlawModel> flaws;
  std::string flaw_source;
  if (!f.calibration.empty()) {
    const auto cal = lossq::io::load_calibration(f.calibration);
    flaws = lossq::worst_case_flaws(cal.record).flaws;
    flaw_source = "calibration file " + f.calibration;
  } else if (cfg && cfg->has("flaws")) {
    flaws = lossq::io::read_flaws(cfg->child("flaws"));
    flaw_source = "config file";
  } else if (counts.flaws) {
    flaws = counts.flaws;
    flaw_source = "counts file";
  }
  if (!flaws) throw lossq::InvalidInput("no source flaws: pass --calibration or a 'flaws' block");
  if (cfg && cfg->has("system")) {
    counts.system = lossq::io::read_system(cfg->child("system"), &counts.defaulted);
  }
  const lossq::SecurityBudget budget = budget_from(f, cfg, counts.defaulted);
  const lossq::AnalysisOptions opts = analysis_options(f);

  if (lossq::parse_analysis_kind(f.analysis) == lossq::AnalysisKind::gllp) {
    const auto r = lossq::analyze_gllp(counts.record, *flaws, counts.system, budget, opts);
    Json doc{{"version", lossq::io::kSchemaVersion}, {"kind", "gllp-report"}};
    doc["results"] = lossq::io::gllp_json(r);
    doc["budget"] = lossq::io::budget_json(budget);
    doc["assumptions"] = lossq::io::assumptions_json(
        {{"q", "1 (coin penalty carries the flaws)"}, {"flaws", flaw_source}}, counts.defaulted);
    emit(dump(doc), f.out);
    return r.key_length > 0.0 ? kOk : kNoKey;
  }

  lossq::KeyRateReport r = lossq::analyze(counts.record, *flaws, counts.system, budget, opts);
  r.assumptions["flaws"] = flaw_source;
  Json doc = lossq::io::report_json(r, counts.defaulted);
  doc["flaws"] = lossq::io::flaws_json(*flaws);
  if (!counts.provenance.empty()) doc["input_provenance"] = counts.provenance;
  emit(dump(doc), f.out);
  for (const auto& flag : r.flags) std::cerr << "lossq: " << flag << "\n";
  return r.key_produced() ? kOk : kNoKey;
}

int cmd_calibrate(const Flags& f) {
  if (f.calibration.empty()) throw lossq::InvalidInput("calibrate needs --calibration");
  const auto cal = lossq::io::load_calibration(f.calibration);
  const auto res = lossq::worst_case_flaws(cal.record);
  for (const auto& w : res.warnings) std::cerr << "lossq: warning: " << w << "\n";
  emit(dump(lossq::io::calibration_json(cal, res)), f.out);
  return kOk;
}

std::vector<double> read_distances(const Reader& sweep) {
  const Json& d = sweep.raw().at("distances_km");
  std::vector<double> out;
  if (d.is_array()) {
    for (const auto& v : d) {
      if (!v.is_number()) throw lossq::InvalidInput("sweep.distances_km: expected numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }
  const Reader range = sweep.child("distances_km");
  const double start = range.number("start"), stop = range.number("stop");
  const int count = static_cast<int>(range.number("count"));
  if (count < 1) throw lossq::InvalidInput("sweep.distances_km.count must be positive");
  for (int i = 0; i < count; ++i) {
    out.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
  }
  return out;
}

lossq::OptimizerOptions read_optimizer(const std::optional<Reader>& r) {
  lossq::OptimizerOptions o;
  if (!r) return o;
  if (auto box = r->maybe_child("box")) {
    o.box.mu_min = box->number("mu_min", o.box.mu_min);
    o.box.mu_max = box->number("mu_max", o.box.mu_max);
    o.box.nu_min = box->number("nu_min", o.box.nu_min);
    o.box.nu_max_fraction = box->number("nu_max_fraction", o.box.nu_max_fraction);
    o.box.omega = box->number("omega", o.box.omega);
    o.box.p_min = box->number("p_min", o.box.p_min);
    o.box.p_max = box->number("p_max", o.box.p_max);
  }
  o.grid_mu = static_cast<int>(r->number("grid_mu", o.grid_mu));
  o.grid_nu = static_cast<int>(r->number("grid_nu", o.grid_nu));
  o.grid_p = static_cast<int>(r->number("grid_p", o.grid_p));
  o.max_iterations = static_cast<int>(r->number("max_iterations", o.max_iterations));
  o.tolerance = r->number("tolerance", o.tolerance);
  return o;
}

std::string curve_path(const std::string& out, const std::string& label, bool single) {
  if (single) return out;
  std::filesystem::path p(out);
  const std::string ext = p.has_extension() ? p.extension().string() : ".csv";
  p.replace_extension();
  return p.string() + "." + label + ext;
}

int cmd_simulate(const Flags& f) {
  const auto doc = config_doc(f);
  if (!doc) throw lossq::InvalidInput("simulate needs --config");
  std::vector<std::string> defaulted;
  const Reader root(*doc, "", &defaulted);
  const lossq::SystemParams sys = lossq::io::read_system(root.maybe_child("system"), &defaulted);
  const lossq::SecurityBudget budget = budget_from(f, root, defaulted);
  const Reader sweep = root.child("sweep");
  const std::vector<double> distances = read_distances(sweep);
  const Json& curves = root.array("curves");
  if (curves.empty()) throw lossq::InvalidInput("curves: at least one curve is required");
  if (f.out.empty() && curves.size() > 1) {
    throw lossq::InvalidInput("several curves need --out");
  }

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const Reader c(curves[i], "curves[" + std::to_string(i) + "]", &defaulted);
    lossq::SimConfig cfg;
    cfg.total_pulses = root.number("total_pulses");
    cfg.flaws = lossq::io::read_flaws(c.child("flaws"));
    if (c.has("intensities")) cfg.intensities = lossq::io::read_intensities(c.child("intensities"));
    if (c.has("probabilities")) {
      cfg.probabilities = lossq::io::read_probabilities(c.child("probabilities"));
    }
    cfg.seed = f.seed ? *f.seed : static_cast<std::uint64_t>(root.number("seed", 1));
    cfg.mode = c.text("mode", "expected") == "sampled" ? lossq::SimMode::sampled
                                                       : lossq::SimMode::expected;
    cfg.sifting = lossq::parse_sifting_model(
        f.sifting ? *f.sifting : root.text("sifting_model", "naive"));
    lossq::SweepOptions so;
    so.db_per_km = sweep.number("db_per_km", 0.2);
    so.kind = lossq::parse_analysis_kind(c.text("analysis"));
    so.optimize_each = c.flag("optimize", false);
    so.optimizer = read_optimizer(root.maybe_child("optimizer"));
    so.analysis = analysis_options(f);
    const auto curve = lossq::rate_vs_distance(cfg, sys, distances, budget, so);
    const std::string label = c.text("label", "curve" + std::to_string(i));
    const std::string csv = lossq::io::curve_csv(curve);
    if (f.out.empty()) {
      std::cout << csv;
    } else {
      lossq::io::write_text(curve_path(f.out, label, curves.size() == 1), csv);
    }
  }
  for (const auto& d : defaulted) std::cerr << "lossq: default: " << d << "\n";
  return kOk;
}

int cmd_optimize(const Flags& f) {
  const auto doc = config_doc(f);
  if (!doc) throw lossq::InvalidInput("optimize needs --config");
  std::vector<std::string> defaulted;
  const Reader root(*doc, "", &defaulted);
  const lossq::SystemParams sys = lossq::io::read_system(root.maybe_child("system"), &defaulted);
  const lossq::SecurityBudget budget = budget_from(f, root, defaulted);
  const Reader opt = root.child("optimization");
  double attenuation = 0.0;
  if (opt.has("attenuation_db")) {
    attenuation = opt.number("attenuation_db");
  } else {
    attenuation = opt.number("distance_km") * opt.number("db_per_km", 0.2);
  }
  const lossq::ChannelModel ch = lossq::ChannelModel::from_system(sys, attenuation);
  const lossq::SourceFlawModel flaws = lossq::io::read_flaws(opt.child("flaws"));
  const auto kind = lossq::parse_analysis_kind(opt.text("analysis", "loss-tolerant"));
  const double n = opt.number("total_pulses");
  const lossq::OptimizerOptions oo = read_optimizer(root.maybe_child("optimizer"));
  const auto res =
      lossq::optimize_parameters(sys, ch, n, budget, flaws, kind, oo, analysis_options(f));

  Json out{{"version", lossq::io::kSchemaVersion}, {"kind", "optimization-report"}};
  out["intensities"] = {{"mu", res.intensities.mu},
                        {"nu", res.intensities.nu},
                        {"omega", res.intensities.omega}};
  out["probabilities"] = {{"p_mu", res.probabilities.p_mu},
                          {"p_nu", res.probabilities.p_nu},
                          {"p_omega", res.probabilities.p_omega},
                          {"p_z", res.probabilities.p_z}};
  out["rate"] = res.rate;
  out["best_grid_rate"] = res.best_grid_rate;
  out["evaluations"] = res.evaluations;
  out["iterations"] = res.iterations;
  out["attenuation_db"] = attenuation;
  out["assumptions"] = lossq::io::assumptions_json(
      {{"objective", "expected-count rate, zero unless the single-photon term is positive"},
       {"sifting_model", "naive"}},
      defaulted);
  emit(dump(out), f.out);
  return res.rate > 0.0 ? kOk : kNoKey;
}

int cmd_audit(const Flags& f) {
  const auto doc = config_doc(f);
  std::vector<std::string> defaulted;
  lossq::ModulatorPhysics phys;
  lossq::PolarizationLeak leak;
  std::optional<Reader> root, audit;
  if (doc) root.emplace(*doc, "", &defaulted);
  if (root && root->has("audit")) audit.emplace(root->child("audit"));
  if (audit && audit->has("modulator")) {
    const Reader m = audit->child("modulator");
    phys.r_z = m.number("r_z", phys.r_z);
    phys.d = m.number("d", phys.d);
    phys.l0 = m.number("l0", phys.l0);
    phys.wavelength_um = m.number("wavelength_um", phys.wavelength_um);
    phys.pulse_fwhm_ns = m.number("pulse_fwhm_ns", phys.pulse_fwhm_ns);
    phys.voltage_fraction = m.number("voltage_fraction", phys.voltage_fraction);
  } else {
    defaulted.push_back("audit.modulator = LiNbO3 telecom defaults");
  }
  if (audit && audit->has("polarization")) {
    const Reader p = audit->child("polarization");
    leak.alpha_sq = p.number("alpha_sq", leak.alpha_sq);
    leak.modulation_ratio = p.number("modulation_ratio", leak.modulation_ratio);
  } else {
    defaulted.push_back("audit.polarization = 30 dB extinction, 1:3 modulation ratio");
  }
  const auto report = lossq::audit(phys, leak);
  emit(dump(lossq::io::audit_json(phys, leak, report, defaulted)), f.out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lossq: finite-key rates for decoy-state QKD with flawed sources"};
  Flags f;
  app.add_option("--counts", f.counts, "counts JSON");
  app.add_option("--calibration", f.calibration, "calibration JSON");
  app.add_option("--config", f.config, "run config JSON");
  app.add_option("--out", f.out, "output path (stdout when omitted)");
  app.add_option("--seed", f.seed, "seed for sampled simulation");
  app.add_option("--eps-total", f.eps_total, "total failure probability");
  app.add_option("--sifting-model", f.sifting, "naive | alice-only | none");
  app.add_option("--bound-convention", f.convention, "conservative | as-printed")
      ->check(CLI::IsMember({"conservative", "as-printed"}));
  app.add_option("--q", f.q, "derived | <value>");
  app.add_option("--analysis", f.analysis, "loss-tolerant | gllp")
      ->check(CLI::IsMember({"loss-tolerant", "gllp"}));
  app.add_flag("--asymptotic", f.asymptotic, "drop the Hoeffding deviations");

  auto* analyze = app.add_subcommand("analyze", "key rate from a counts file")->fallthrough();
  auto* calibrate = app.add_subcommand("calibrate", "modulation-error bounds")->fallthrough();
  auto* simulate = app.add_subcommand("simulate", "rate-vs-distance curves")->fallthrough();
  auto* optimize = app.add_subcommand("optimize", "optimize protocol parameters")->fallthrough();
  auto* audit = app.add_subcommand("audit", "qubit-assumption audit")->fallthrough();
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(f);
    if (calibrate->parsed()) return cmd_calibrate(f);
    if (simulate->parsed()) return cmd_simulate(f);
    if (optimize->parsed()) return cmd_optimize(f);
    if (audit->parsed()) return cmd_audit(f);
  } catch (const lossq::InvalidInput& e) {
    std::cerr << "lossq: error: " << e.what() << "\n";
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "lossq: error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "lossq: error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
