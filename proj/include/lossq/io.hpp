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

// JSON schemas (version "1") for counts, calibration and run configs, the
// report emitters, and the curve CSV.

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "lossq/calibration.hpp"
#include "lossq/core_model.hpp"
#include "lossq/error.hpp"
#include "lossq/gllp.hpp"
#include "lossq/key_rate.hpp"
#include "lossq/qubit_audit.hpp"
#include "lossq/simulator.hpp"

namespace lossq::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1";

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw InvalidInput("not a number: '" + text + "'");
  }
  return v;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Parses JSON text; syntax errors report line and column.
inline Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InvalidInput(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                       ": malformed JSON");
  }
}

inline Json load_json(const std::string& path) { return parse_json(read_file(path), path); }

/// Field access with path diagnostics and default tracking.
class Reader {
 public:
  Reader(const Json& node, std::string path, std::vector<std::string>* defaulted = nullptr)
      : node_(node), path_(std::move(path)), defaulted_(defaulted) {
    if (!node_.is_object()) throw InvalidInput(where() + ": expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  double number(const std::string& key) const {
    const Json& v = field(key);
    if (!v.is_number()) throw InvalidInput(where(key) + ": expected a number");
    return v.get<double>();
  }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) {
      note_default(key, format_double(fallback));
      return fallback;
    }
    return number(key);
  }

  std::optional<double> maybe_number(const std::string& key) const {
    if (!has(key) || node_.at(key).is_null()) return std::nullopt;
    return number(key);
  }

  std::string text(const std::string& key) const {
    const Json& v = field(key);
    if (!v.is_string()) throw InvalidInput(where(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) {
      note_default(key, fallback);
      return fallback;
    }
    return text(key);
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) {
      note_default(key, fallback ? "true" : "false");
      return fallback;
    }
    const Json& v = node_.at(key);
    if (!v.is_boolean()) throw InvalidInput(where(key) + ": expected true or false");
    return v.get<bool>();
  }

  Reader child(const std::string& key) const { return Reader(field(key), where(key), defaulted_); }

  std::optional<Reader> maybe_child(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return child(key);
  }

  const Json& array(const std::string& key) const {
    const Json& v = field(key);
    if (!v.is_array()) throw InvalidInput(where(key) + ": expected an array");
    return v;
  }

  const Json& raw() const { return node_; }
  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const Json& field(const std::string& key) const {
    if (!has(key)) throw InvalidInput(where(key) + ": missing field");
    return node_.at(key);
  }
  void note_default(const std::string& key, const std::string& value) const {
    if (defaulted_) defaulted_->push_back(where(key) + " = " + value);
  }

  const Json& node_;
  std::string path_;
  std::vector<std::string>* defaulted_;
};

inline void check_version(const Json& doc, const std::string& source) {
  if (!doc.is_object()) throw InvalidInput(source + ": top level must be an object");
  if (!doc.contains("version")) throw InvalidInput(source + ": missing field 'version'");
  if (doc["version"] != kSchemaVersion) {
    throw InvalidInput(source + ": unsupported schema version (expected \"1\")");
  }
}

inline ClassCounts read_class(const Reader& r, const std::string& prefix) {
  return {r.number(prefix + "_mu"), r.number(prefix + "_nu"), r.number(prefix + "_omega")};
}

inline void write_class(Json& out, const std::string& prefix, const ClassCounts& c) {
  out[prefix + "_mu"] = c.mu;
  out[prefix + "_nu"] = c.nu;
  out[prefix + "_omega"] = c.omega;
}

inline IntensitySettings read_intensities(const Reader& r) {
  return {r.number("mu"), r.number("nu"), r.number("omega")};
}

inline ProtocolProbabilities read_probabilities(const Reader& r) {
  return ProtocolProbabilities::from_free(r.number("p_mu"), r.number("p_nu"), r.number("p_z"));
}

inline SystemParams read_system(const std::optional<Reader>& r, std::vector<std::string>* defaulted) {
  SystemParams s;
  if (!r) {
    if (defaulted) defaulted->push_back("system = built-in detector/channel defaults");
    return s;
  }
  s.eta_bob = r->number("eta_bob", s.eta_bob);
  s.y0 = r->number("y0", s.y0);
  s.e_d = r->number("e_d", s.e_d);
  s.f_rep = r->number("f_rep", s.f_rep);
  s.wavelength_nm = r->number("wavelength_nm", s.wavelength_nm);
  s.f_e = r->number("f_e", s.f_e);
  return s;
}

inline Json system_json(const SystemParams& s) {
  return {{"eta_bob", s.eta_bob}, {"y0", s.y0},   {"e_d", s.e_d},
          {"f_rep", s.f_rep},     {"wavelength_nm", s.wavelength_nm}, {"f_e", s.f_e}};
}

inline SourceFlawModel read_flaws(const Reader& r) {
  if (r.has("uniform_delta")) return SourceFlawModel::uniform(r.number("uniform_delta"));
  return {r.number("delta1"), r.number("delta2"), r.number("delta3")};
}

inline Json flaws_json(const SourceFlawModel& f) {
  return {{"delta1", f.delta1}, {"delta2", f.delta2}, {"delta3", f.delta3}};
}

/// A counts file: the record plus optional flaw and system blocks.
struct CountsFile {
  CountsRecord record;
  std::optional<SourceFlawModel> flaws;
  SystemParams system;
  std::string provenance;
  std::vector<std::string> defaulted;
};

inline CountsFile parse_counts(const Json& doc, const std::string& source = "counts") {
  check_version(doc, source);
  CountsFile f;
  const Reader root(doc, "", &f.defaulted);
  const Reader c = root.child("counts");
  CountsRecord& rec = f.record;
  rec.n_z = read_class(c, "n_z");
  rec.n_x = read_class(c, "n_x");
  rec.n_ez = read_class(c, "n_ez");
  rec.n_ex = read_class(c, "n_ex");
  rec.n_0x_given_z = read_class(c, "n_0x_given_z");
  rec.n_1x_given_z = read_class(c, "n_1x_given_z");
  if (auto res = c.maybe_child("resolved")) {
    rec.resolved = ResolvedMismatch{read_class(*res, "n_0x_given_0z"),
                                    read_class(*res, "n_1x_given_0z"),
                                    read_class(*res, "n_0x_given_1z"),
                                    read_class(*res, "n_1x_given_1z")};
  }
  rec.total_pulses = root.number("total_pulses");
  rec.intensities = read_intensities(root.child("intensities"));
  rec.probabilities = read_probabilities(root.child("probabilities"));
  if (auto ref = root.maybe_child("reference")) {
    PublishedReference p;
    p.source = ref->text("source", "unspecified");
    p.s0_lower = ref->maybe_number("s0_lower");
    p.s1_lower = ref->maybe_number("s1_lower");
    p.ex1_upper = ref->maybe_number("ex1_upper");
    p.qber_z = ref->maybe_number("qber_z");
    p.key_length = ref->maybe_number("key_length");
    p.rate = ref->maybe_number("rate");
    rec.reference = p;
  }
  if (auto fl = root.maybe_child("flaws")) f.flaws = read_flaws(*fl);
  f.system = read_system(root.maybe_child("system"), &f.defaulted);
  if (root.has("provenance")) f.provenance = root.text("provenance");
  return f;
}

inline CountsFile load_counts(const std::string& path) {
  const std::string text = read_file(path);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw InvalidInput(path + ": empty counts file");
  }
  return parse_counts(parse_json(text, path), path);
}

inline Json counts_json(const CountsRecord& rec, const std::string& provenance = "") {
  Json counts;
  write_class(counts, "n_z", rec.n_z);
  write_class(counts, "n_x", rec.n_x);
  write_class(counts, "n_ez", rec.n_ez);
  write_class(counts, "n_ex", rec.n_ex);
  write_class(counts, "n_0x_given_z", rec.n_0x_given_z);
  write_class(counts, "n_1x_given_z", rec.n_1x_given_z);
  if (rec.resolved) {
    Json r;
    write_class(r, "n_0x_given_0z", rec.resolved->n_0x_given_0z);
    write_class(r, "n_1x_given_0z", rec.resolved->n_1x_given_0z);
    write_class(r, "n_0x_given_1z", rec.resolved->n_0x_given_1z);
    write_class(r, "n_1x_given_1z", rec.resolved->n_1x_given_1z);
    counts["resolved"] = r;
  }
  Json doc{{"version", kSchemaVersion}};
  if (!provenance.empty()) doc["provenance"] = provenance;
  doc["counts"] = counts;
  doc["total_pulses"] = rec.total_pulses;
  doc["intensities"] = {{"mu", rec.intensities.mu},
                        {"nu", rec.intensities.nu},
                        {"omega", rec.intensities.omega}};
  doc["probabilities"] = {{"p_mu", rec.probabilities.p_mu},
                          {"p_nu", rec.probabilities.p_nu},
                          {"p_z", rec.probabilities.p_z}};
  return doc;
}

struct CalibrationFile {
  CalibrationRecord record;
  std::string provenance;
  std::vector<std::string> defaulted;
};

inline CalibrationFile parse_calibration(const Json& doc, const std::string& source = "calibration") {
  check_version(doc, source);
  CalibrationFile f;
  const Reader root(doc, "", &f.defaulted);
  CalibrationRecord& rec = f.record;
  rec.system = root.text("system", "unnamed");
  if (root.has("provenance")) f.provenance = root.text("provenance");
  const Json& rows = root.array("rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Reader row(rows[i], "rows[" + std::to_string(i) + "]");
    rec.rows.push_back({row.number("theta"), row.number("d1"), row.number("d2")});
  }
  if (root.has("efficiencies")) {
    const Reader eff = root.child("efficiencies");
    rec.eta_d1 = eff.number("d1");
    rec.eta_d2 = eff.number("d2");
  } else {
    rec.efficiencies_defaulted = true;
    f.defaulted.push_back("efficiencies = equal (d1 = d2 = 1)");
  }
  rec.eps = root.number("eps", rec.eps);
  if (root.has("dark")) {
    const Reader dark = root.child("dark");
    rec.dark_d1 = dark.number("d1");
    rec.dark_d2 = dark.number("d2");
  } else {
    f.defaulted.push_back("dark baseline = d1 count of the theta = 0 row, both detectors");
  }
  try {
    rec.validate();
  } catch (const InvalidInput& e) {
    throw InvalidInput(source + ": " + e.what());
  }
  return f;
}

inline CalibrationFile load_calibration(const std::string& path) {
  return parse_calibration(load_json(path), path);
}

inline Json assumptions_json(const std::map<std::string, std::string>& base,
                             const std::vector<std::string>& defaulted) {
  Json a = Json::object();
  for (const auto& [k, v] : base) a[k] = v;
  a["defaulted"] = defaulted;
  return a;
}

inline Json budget_json(const SecurityBudget& b) {
  return {{"eps_tot", b.eps_tot},     {"eps_sec", b.eps_sec}, {"eps_corr", b.eps_corr},
          {"eps_bound", b.eps_bound}, {"eps_ph", b.eps_ph}};
}

inline Json report_json(const KeyRateReport& r, const std::vector<std::string>& defaulted = {}) {
  Json doc{{"version", kSchemaVersion}, {"kind", "key-rate-report"}};
  doc["results"] = {{"key_length", r.key_length},
                    {"rate", r.rate},
                    {"s0_lower", r.s0_lower},
                    {"s1_lower", r.s1_lower},
                    {"s1_upper", r.s1_upper},
                    {"ex1_upper", r.ex1_upper},
                    {"qber_z", r.qber_z},
                    {"leak_ec", r.leak_ec},
                    {"epsilon_cost", r.epsilon_cost},
                    {"q_used", r.q_used},
                    {"total_pulses", r.total_pulses}};
  Json mismatch = Json::array();
  for (const auto& row : r.mismatch.by_outcome) {
    Json j = Json::array();
    for (const Interval& v : row) j.push_back({v.lower, v.upper});
    mismatch.push_back(j);
  }
  doc["mismatch_singles"] = mismatch;
  if (r.virtual_counts) {
    Json v = Json::array();
    for (const auto& row : r.virtual_counts->counts) {
      Json j = Json::array();
      for (const Interval& x : row) j.push_back({x.lower, x.upper});
      v.push_back(j);
    }
    doc["virtual_singles"] = v;
  }
  doc["budget"] = budget_json(r.budget);
  doc["concentration_uses"] = r.concentration_uses;
  doc["eps_consumed"] = r.eps_consumed;
  doc["flags"] = r.flags;
  doc["assumptions"] = assumptions_json(r.assumptions, defaulted);
  return doc;
}

/// Inverse of report_json for the scalar results and flags.
inline KeyRateReport parse_report(const Json& doc) {
  check_version(doc, "report");
  const Reader root(doc, "");
  const Reader res = root.child("results");
  KeyRateReport r;
  r.key_length = res.number("key_length");
  r.rate = res.number("rate");
  r.s0_lower = res.number("s0_lower");
  r.s1_lower = res.number("s1_lower");
  r.s1_upper = res.number("s1_upper");
  r.ex1_upper = res.number("ex1_upper");
  r.qber_z = res.number("qber_z");
  r.leak_ec = res.number("leak_ec");
  r.epsilon_cost = res.number("epsilon_cost");
  r.q_used = res.number("q_used");
  r.total_pulses = res.number("total_pulses");
  const Reader b = root.child("budget");
  r.budget = {b.number("eps_tot"), b.number("eps_sec"), b.number("eps_corr"),
              b.number("eps_bound"), b.number("eps_ph")};
  r.concentration_uses = static_cast<int>(root.number("concentration_uses"));
  r.eps_consumed = root.number("eps_consumed");
  for (const auto& f : root.array("flags")) r.flags.push_back(f.get<std::string>());
  const Reader a = root.child("assumptions");
  for (const auto& [k, v] : a.raw().items()) {
    if (v.is_string()) r.assumptions[k] = v.get<std::string>();
  }
  return r;
}

inline Json gllp_json(const GllpReport& r) {
  return {{"key_length", r.key_length},
          {"rate", r.rate},
          {"s0_lower", r.s0_lower},
          {"s1_lower", r.s1_lower},
          {"ex1_upper", r.ex1_upper},
          {"ex1_corrected", r.ex1_corrected},
          {"qber_z", r.qber_z},
          {"coin_delta", r.coin.delta_imbalance},
          {"coin_delta_prime", r.coin.delta_prime},
          {"y1", r.coin.y1},
          {"flags", r.flags}};
}

inline Json calibration_json(const CalibrationFile& f, const CalibrationResult& r) {
  Json doc{{"version", kSchemaVersion}, {"kind", "calibration-report"}, {"system", f.record.system}};
  doc["delta_upper"] = {{"pi/2", r.flaws.delta1}, {"pi", r.flaws.delta2},
                        {"3pi/2", r.flaws.delta3}};
  doc["max_delta"] = r.max_delta;
  doc["flaws"] = flaws_json(r.flaws);
  doc["warnings"] = r.warnings;
  doc["assumptions"] = assumptions_json(
      {{"reflection", "targets above pi compared against 2pi - theta"},
       {"deviation", "hoeffding on each count, eps = " + format_double(f.record.eps)}},
      f.defaulted);
  return doc;
}

inline Json audit_json(const ModulatorPhysics& p, const PolarizationLeak& leak,
                       const AuditReport& r, const std::vector<std::string>& defaulted) {
  Json doc{{"version", kSchemaVersion}, {"kind", "qubit-audit"}};
  doc["inputs"] = {{"r_z", p.r_z},
                   {"d", p.d},
                   {"l0", p.l0},
                   {"wavelength_um", p.wavelength_um},
                   {"pulse_fwhm_ns", p.pulse_fwhm_ns},
                   {"voltage_fraction", p.voltage_fraction},
                   {"alpha_sq", leak.alpha_sq},
                   {"modulation_ratio", leak.modulation_ratio}};
  doc["n_e"] = r.n_e;
  doc["v_pi"] = r.v_pi;
  doc["timing_shift"] = r.timing_shift_ns;
  doc["timing_fidelity"] = r.timing_fidelity;
  doc["polarization_fidelity"] = r.polarization_fidelity;
  doc["assumptions"] = assumptions_json(
      {{"timing_units", "ns"},
       {"dispersion", "central difference on the Sellmeier curve, step 1e-4 um"},
       {"timing_fidelity", "amplitude overlap of Gaussian pulses, exp(-ln2 dt^2/T^2)"}},
      defaulted);
  return doc;
}

inline const std::vector<std::string>& curve_columns() {
  static const std::vector<std::string> cols{"distance_km", "rate", "key_length", "s0",
                                             "s1",          "ex1",  "qber"};
  return cols;
}

inline std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::string out;
  for (std::size_t i = 0; i < curve_columns().size(); ++i) {
    out += (i ? "," : "") + curve_columns()[i];
  }
  out += "\n";
  for (const CurvePoint& p : curve) {
    const double vals[] = {p.distance_km, p.rate, p.key_length, p.s0, p.s1, p.ex1, p.qber};
    for (int i = 0; i < 7; ++i) {
      if (i) out += ",";
      out += format_double(vals[i]);
    }
    out += "\n";
  }
  return out;
}

inline std::vector<CurvePoint> parse_curve_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("curve CSV: empty");
  std::vector<CurvePoint> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) v.push_back(parse_double(cell));
    if (v.size() != 7) {
      throw InvalidInput("curve CSV line " + std::to_string(lineno) + ": expected 7 columns");
    }
    out.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6]});
  }
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << text;
}

}  // namespace lossq::io
