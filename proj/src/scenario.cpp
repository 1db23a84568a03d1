// Copyright 2026 The covrec Authors
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

#include "covrec/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace covrec {
namespace {

using nlohmann::json;
using Complex = std::complex<double>;

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

void check_keys(const json& j, std::string_view where,
                std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) fail(std::string(where) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

double number(const json& j, std::string_view where) {
  if (!j.is_number()) fail(std::string(where) + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(std::string(where) + ": non-finite value");
  return v;
}

double number_or(const json& j, const char* key, double fallback, std::string_view where) {
  return j.contains(key) ? number(j.at(key), std::string(where) + "." + key) : fallback;
}

std::uint64_t count(const json& j, std::string_view where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    fail(std::string(where) + ": expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

json complex_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

Complex complex_of(const json& j, std::string_view where) {
  if (j.is_number()) return {number(j, where), 0.0};
  check_keys(j, where, {"re", "im"});
  return {number_or(j, "re", 0.0, where), number_or(j, "im", 0.0, where)};
}

template <std::size_t N>
std::array<double, N> number_array(const json& j, std::string_view where) {
  if (!j.is_array() || j.size() != N) {
    fail(std::string(where) + ": expected an array of " + std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = number(j[i], where);
  return out;
}

std::optional<std::uint64_t> shots_of(const json& j, std::string_view where) {
  if (j.is_null()) return std::nullopt;
  if (j.is_string()) return parse_shots(j.get<std::string>());
  return count(j, where);
}

std::vector<double> grid_of(const json& j, std::string_view where) {
  if (j.is_number_unsigned() || j.is_number_integer()) {
    return uniform_phase_grid(static_cast<std::size_t>(count(j, where)));
  }
  if (!j.is_array()) fail(std::string(where) + ": expected a point count or phase list");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number(v, where));
  return out;
}

TwoModeCoefficients coefficients_of(const json& j, std::string_view where) {
  check_keys(j, where, {"type", "b1", "b2", "c1", "c2", "d12", "dbar12"});
  TwoModeCoefficients x;
  x.b1 = number_or(j, "b1", 0.0, where);
  x.b2 = number_or(j, "b2", 0.0, where);
  if (j.contains("c1")) x.c1 = complex_of(j.at("c1"), "c1");
  if (j.contains("c2")) x.c2 = complex_of(j.at("c2"), "c2");
  if (j.contains("d12")) x.d12 = complex_of(j.at("d12"), "d12");
  if (j.contains("dbar12")) x.dbar12 = complex_of(j.at("dbar12"), "dbar12");
  return x;
}

json coefficients_json(const TwoModeCoefficients& x) {
  return {{"b1", x.b1},
          {"b2", x.b2},
          {"c1", complex_json(x.c1)},
          {"c2", complex_json(x.c2)},
          {"d12", complex_json(x.d12)},
          {"dbar12", complex_json(x.dbar12)}};
}

UnknownSpec unknown_of(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    fail("unknown: expected an object with a string 'type'");
  }
  const std::string type = j.at("type").get<std::string>();
  UnknownSpec spec;
  if (type == "vacuum") {
    check_keys(j, "unknown", {"type"});
    spec.kind = UnknownSpec::Kind::vacuum;
  } else if (type == "coefficients") {
    spec.kind = UnknownSpec::Kind::coefficients;
    spec.coefficients = coefficients_of(j, "unknown");
  } else if (type == "random") {
    check_keys(j, "unknown", {"type", "seed", "max_b"});
    spec.kind = UnknownSpec::Kind::random;
    if (j.contains("seed")) spec.seed = count(j.at("seed"), "unknown.seed");
    spec.max_b = number_or(j, "max_b", 1.0, "unknown");
    if (spec.max_b < 0.0) fail("unknown.max_b must be >= 0");
  } else if (type == "twin") {
    check_keys(j, "unknown", {"type", "b_p", "phi"});
    spec.kind = UnknownSpec::Kind::twin;
    spec.twin.b_p = number_or(j, "b_p", 0.0, "unknown");
    spec.twin.phi = number_or(j, "phi", 0.0, "unknown");
    if (spec.twin.b_p < 0.0) fail("unknown.b_p must be >= 0");
  } else if (type == "squeezed") {
    check_keys(j, "unknown", {"type", "thermal", "r", "psi", "mixer"});
    spec.kind = UnknownSpec::Kind::squeezed;
    if (j.contains("thermal")) spec.squeezed.thermal = number_array<2>(j.at("thermal"), "thermal");
    if (j.contains("r")) spec.squeezed.r = number_array<2>(j.at("r"), "r");
    if (j.contains("psi")) spec.squeezed.psi = number_array<2>(j.at("psi"), "psi");
    if (j.contains("mixer")) {
      const json& m = j.at("mixer");
      check_keys(m, "unknown.mixer", {"t", "theta"});
      spec.squeezed.mixer =
          BeamSplitter(number_or(m, "t", 1.0, "mixer"), number_or(m, "theta", 0.0, "mixer"));
    }
  } else {
    fail("unknown.type must be one of coefficients, random, twin, squeezed, vacuum");
  }
  return spec;
}

ExperimentPlan plan_of(const json& j) {
  check_keys(j, "plan",
             {"b_p", "phi_grid", "theta_grid", "detectors", "shots", "seed", "vacuum_arm",
              "noise_multiplier", "assume_symmetric", "residual_tolerance", "chi2_threshold",
              "magnitude_sigmas"});
  ExperimentPlan plan;
  plan.b_p = number_or(j, "b_p", plan.b_p, "plan");
  if (j.contains("phi_grid")) plan.phi_grid = grid_of(j.at("phi_grid"), "plan.phi_grid");
  if (j.contains("theta_grid")) plan.theta_grid = grid_of(j.at("theta_grid"), "plan.theta_grid");
  if (j.contains("detectors")) {
    const json& d = j.at("detectors");
    check_keys(d, "plan.detectors", {"eta", "dark"});
    if (d.contains("eta")) plan.det.eta = number_array<4>(d.at("eta"), "plan.detectors.eta");
    if (d.contains("dark")) plan.det.dark = number_array<4>(d.at("dark"), "plan.detectors.dark");
  }
  if (j.contains("shots")) plan.shots = shots_of(j.at("shots"), "plan.shots");
  if (j.contains("seed")) plan.seed = count(j.at("seed"), "plan.seed");
  if (j.contains("vacuum_arm")) {
    const auto arm = count(j.at("vacuum_arm"), "plan.vacuum_arm");
    if (arm != 1 && arm != 2) fail("plan.vacuum_arm must be 1 or 2");
    plan.arm = arm == 1 ? VacuumArm::one : VacuumArm::two;
  }
  plan.noise.multiplier = number_or(j, "noise_multiplier", plan.noise.multiplier, "plan");
  if (j.contains("assume_symmetric")) {
    if (!j.at("assume_symmetric").is_boolean()) fail("plan.assume_symmetric: expected a boolean");
    plan.assume_symmetric = j.at("assume_symmetric").get<bool>();
  }
  plan.residual_tolerance = number_or(j, "residual_tolerance", plan.residual_tolerance, "plan");
  plan.chi2_threshold = number_or(j, "chi2_threshold", plan.chi2_threshold, "plan");
  plan.magnitude_sigmas = number_or(j, "magnitude_sigmas", plan.magnitude_sigmas, "plan");
  plan.validate();
  return plan;
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fixed(double v, int width = 14) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%*.*e", width, 6, v);
  return buf;
}

constexpr std::array<const char*, kDetectorPairs> kPairLabels{"12", "13", "14",
                                                              "23", "24", "34"};

std::string_view preparation_name(ReferenceVariant v) { return to_string(v); }

void append_row(std::ostringstream& os, std::string_view prep, double phase,
                const MeasurementRecord& r) {
  os << prep << ',' << shortest(phase);
  for (double v : r.mean_m) os << ',' << shortest(v);
  for (double v : r.cross_mm) os << ',' << shortest(v);
  for (double v : r.sigma_mean) os << ',' << shortest(v);
  for (double v : r.sigma_cross) os << ',' << shortest(v);
  os << ',' << (r.shots ? std::to_string(*r.shots) : std::string("inf"));
  os << ',' << (r.seed ? std::to_string(*r.seed) : std::string());
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    fail("records: malformed number '" + s + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    fail("records: malformed integer '" + s + "'");
  }
  return v;
}

void place(ExperimentRecords& records, const std::string& prep, double phase,
           const MeasurementRecord& r, bool& have_vacuum) {
  if (prep == preparation_name(ReferenceVariant::vacuum)) {
    if (have_vacuum) fail("records: duplicate vacuum record");
    records.vacuum = r;
    have_vacuum = true;
  } else if (prep == preparation_name(ReferenceVariant::balanced_mix)) {
    records.balanced_mix.push_back({phase, r});
  } else if (prep == preparation_name(ReferenceVariant::pure_twin)) {
    records.pure_twin.push_back({phase, r});
  } else if (prep == preparation_name(ReferenceVariant::single_arm_vacuum)) {
    records.single_arm.push_back({phase, r});
  } else {
    fail("records: unknown preparation '" + prep + "'");
  }
}

std::string csv_header() {
  std::string h = "preparation,phase";
  for (int j = 1; j <= 4; ++j) h += ",mean_" + std::to_string(j);
  for (const char* p : kPairLabels) h += std::string(",cross_") + p;
  for (int j = 1; j <= 4; ++j) h += ",sigma_mean_" + std::to_string(j);
  for (const char* p : kPairLabels) h += std::string(",sigma_cross_") + p;
  h += ",shots,seed,arm";
  return h;
}

json record_json(std::string_view prep, double phase, const MeasurementRecord& r) {
  json j{{"preparation", prep},  {"phase", phase},           {"mean", r.mean_m},
         {"cross", r.cross_mm},  {"sigma_mean", r.sigma_mean}, {"sigma_cross", r.sigma_cross},
         {"shots", nullptr},     {"seed", nullptr}};
  if (r.shots) j["shots"] = *r.shots;
  if (r.seed) j["seed"] = *r.seed;
  return j;
}

json errors_json(const CoefficientErrors& e) {
  return {{"b1", e.b1}, {"b2", e.b2},   {"c1", e.c1},         {"c2", e.c2},
          {"d12", e.d12}, {"dbar12", e.dbar12}, {"max", e.max()}};
}

json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

json shots_json(const std::optional<std::uint64_t>& v) {
  return v ? json(*v) : json("inf");
}

std::string shots_label(const std::optional<std::uint64_t>& v) {
  return v ? std::to_string(*v) : std::string("inf");
}

}  // namespace

std::optional<std::uint64_t> parse_shots(std::string_view text) {
  if (text == "inf") return std::nullopt;
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    fail("shots must be a non-negative integer or 'inf'");
  }
  if (v < 2) fail("shots must be >= 2");
  return v;
}

Scenario parse_scenario(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("config: ") + e.what());
  }
  check_keys(j, "config", {"unknown", "plan", "output", "roundtrip"});
  Scenario s;
  if (j.contains("unknown")) {
    s.unknown = unknown_of(j.at("unknown"));
    s.has_unknown = true;
  }
  if (j.contains("plan")) s.plan = plan_of(j.at("plan"));
  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, "output", {"dir", "format"});
    if (o.contains("dir")) {
      if (!o.at("dir").is_string()) fail("output.dir: expected a string");
      s.out_dir = o.at("dir").get<std::string>();
    }
    if (o.contains("format")) {
      const json& f = o.at("format");
      if (f == "json") {
        s.format = OutputFormat::json;
      } else if (f == "csv") {
        s.format = OutputFormat::csv;
      } else {
        fail("output.format must be json or csv");
      }
    }
  }
  if (j.contains("roundtrip")) {
    const json& r = j.at("roundtrip");
    check_keys(r, "roundtrip", {"trials", "seeds", "shots_sweep"});
    if (r.contains("trials")) s.roundtrip.trials = count(r.at("trials"), "roundtrip.trials");
    if (r.contains("seeds")) s.roundtrip.seeds = count(r.at("seeds"), "roundtrip.seeds");
    if (s.roundtrip.trials == 0 || s.roundtrip.seeds == 0) {
      fail("roundtrip.trials and roundtrip.seeds must be >= 1");
    }
    if (r.contains("shots_sweep")) {
      if (!r.at("shots_sweep").is_array()) fail("roundtrip.shots_sweep: expected an array");
      for (const auto& v : r.at("shots_sweep")) {
        s.roundtrip.shots_sweep.push_back(shots_of(v, "roundtrip.shots_sweep"));
      }
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

TwoModeCoefficients resolve_unknown(const UnknownSpec& spec, std::size_t trial) {
  TwoModeCoefficients x;
  switch (spec.kind) {
    case UnknownSpec::Kind::vacuum:
      break;
    case UnknownSpec::Kind::coefficients:
      x = spec.coefficients;
      break;
    case UnknownSpec::Kind::random: {
      std::mt19937_64 rng(derive_seed(spec.seed, trial));
      x = random_physical_state(rng, spec.max_b);
      break;
    }
    case UnknownSpec::Kind::twin:
      x = twin_beam(spec.twin);
      break;
    case UnknownSpec::Kind::squeezed:
      x = squeezed_state(spec.squeezed);
      break;
  }
  if (!is_physical(x)) throw NumericalError("unknown state is not physical");
  return x;
}

std::string records_to_csv(const ExperimentRecords& records) {
  std::ostringstream os;
  const auto arm = std::to_string(static_cast<int>(records.arm));
  os << csv_header() << '\n';
  append_row(os, preparation_name(ReferenceVariant::vacuum), 0.0, records.vacuum);
  os << ',' << arm << '\n';
  auto rows = [&](ReferenceVariant v, const std::vector<SweepPoint>& points) {
    for (const auto& p : points) {
      append_row(os, preparation_name(v), p.phase, p.record);
      os << ',' << arm << '\n';
    }
  };
  rows(ReferenceVariant::balanced_mix, records.balanced_mix);
  rows(ReferenceVariant::pure_twin, records.pure_twin);
  rows(ReferenceVariant::single_arm_vacuum, records.single_arm);
  return os.str();
}

ExperimentRecords records_from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) fail("records: unexpected CSV header");
  ExperimentRecords records;
  bool have_vacuum = false;
  std::optional<std::string> arm;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 25) fail("records: expected 25 columns, got " + std::to_string(f.size()));
    MeasurementRecord r;
    std::size_t col = 2;
    for (auto& v : r.mean_m) v = parse_double(f[col++]);
    for (auto& v : r.cross_mm) v = parse_double(f[col++]);
    for (auto& v : r.sigma_mean) v = parse_double(f[col++]);
    for (auto& v : r.sigma_cross) v = parse_double(f[col++]);
    if (f[col] != "inf") r.shots = parse_u64(f[col]);
    ++col;
    if (!f[col].empty()) r.seed = parse_u64(f[col]);
    ++col;
    if (arm && *arm != f[col]) fail("records: inconsistent arm column");
    arm = f[col];
    place(records, f[0], parse_double(f[1]), r, have_vacuum);
  }
  if (!have_vacuum) fail("records: missing vacuum record");
  if (*arm != "1" && *arm != "2") fail("records: arm must be 1 or 2");
  records.arm = *arm == "1" ? VacuumArm::one : VacuumArm::two;
  return records;
}

std::string records_to_json(const ExperimentRecords& records, const ExperimentPlan& plan) {
  json rows = json::array();
  rows.push_back(record_json(preparation_name(ReferenceVariant::vacuum), 0.0, records.vacuum));
  auto add = [&](ReferenceVariant v, const std::vector<SweepPoint>& points) {
    for (const auto& p : points) rows.push_back(record_json(preparation_name(v), p.phase, p.record));
  };
  add(ReferenceVariant::balanced_mix, records.balanced_mix);
  add(ReferenceVariant::pure_twin, records.pure_twin);
  add(ReferenceVariant::single_arm_vacuum, records.single_arm);
  json j{{"arm", static_cast<int>(records.arm)},
         {"b_p", plan.b_p},
         {"shots", shots_json(plan.shots)},
         {"seed", plan.seed},
         {"records", rows}};
  return j.dump(2) + "\n";
}

ExperimentRecords records_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("records: ") + e.what());
  }
  check_keys(j, "records", {"arm", "b_p", "shots", "seed", "records"});
  ExperimentRecords records;
  const auto arm = j.contains("arm") ? count(j.at("arm"), "arm") : 2;
  if (arm != 1 && arm != 2) fail("records: arm must be 1 or 2");
  records.arm = arm == 1 ? VacuumArm::one : VacuumArm::two;
  if (!j.contains("records") || !j.at("records").is_array()) fail("records: missing 'records' list");
  bool have_vacuum = false;
  for (const auto& row : j.at("records")) {
    check_keys(row, "record",
               {"preparation", "phase", "mean", "cross", "sigma_mean", "sigma_cross", "shots",
                "seed"});
    if (!row.contains("preparation") || !row.at("preparation").is_string()) {
      fail("record: missing preparation");
    }
    MeasurementRecord r;
    r.mean_m = number_array<4>(row.at("mean"), "record.mean");
    r.cross_mm = number_array<6>(row.at("cross"), "record.cross");
    if (row.contains("sigma_mean")) r.sigma_mean = number_array<4>(row.at("sigma_mean"), "sigma_mean");
    if (row.contains("sigma_cross")) {
      r.sigma_cross = number_array<6>(row.at("sigma_cross"), "sigma_cross");
    }
    if (row.contains("shots") && !row.at("shots").is_null()) r.shots = count(row.at("shots"), "shots");
    if (row.contains("seed") && !row.at("seed").is_null()) r.seed = count(row.at("seed"), "seed");
    place(records, row.at("preparation").get<std::string>(),
          number_or(row, "phase", 0.0, "record"), r, have_vacuum);
  }
  if (!have_vacuum) fail("records: missing vacuum record");
  return records;
}

std::string report_to_json(const ReconstructionReport& report) {
  json residuals = json::array();
  for (const auto& s : report.residuals) {
    residuals.push_back({{"step", s.step},
                         {"residual_norm", s.residual_norm},
                         {"chi2_per_dof", optional_json(s.chi2_per_dof)},
                         {"flagged", s.flagged}});
  }
  json preps = json::array();
  for (const auto& p : report.used_preparations) {
    preps.push_back({{"variant", to_string(p.variant)},
                     {"b_p", p.source.b_p},
                     {"arm", static_cast<int>(p.arm)},
                     {"bs1_theta", p.bs1_theta}});
  }
  json j{{"recovered", coefficients_json(report.recovered)},
         {"residuals", residuals},
         {"preparations", preps},
         {"abs_c_squared_vacuum", report.abs_c_squared_vacuum},
         {"d12_alternate", complex_json(report.d12_alternate)},
         {"dbar12_alternate", complex_json(report.dbar12_alternate)},
         {"physical", report.physical},
         {"flags", report.flags},
         {"ok", report.ok()},
         {"shots", shots_json(report.shots)},
         {"seed", report.seed}};
  j["c_symmetric"] = report.c_symmetric ? complex_json(*report.c_symmetric) : json(nullptr);
  j["ground_truth_error"] =
      report.ground_truth_error ? errors_json(*report.ground_truth_error) : json(nullptr);
  if (report.self_check) {
    const SelfCheck& s = *report.self_check;
    j["self_check"] = {{"nominal_b_p", s.nominal_b_p},     {"nominal_phi", s.nominal_phi},
                       {"recovered_b_p", s.recovered_b_p}, {"recovered_phi", s.recovered_phi},
                       {"b_p_error", s.b_p_error()},       {"phi_error", s.phi_error()},
                       {"purity_defect", s.purity_defect}};
  } else {
    j["self_check"] = nullptr;
  }
  return j.dump(2) + "\n";
}

std::string report_table(const ReconstructionReport& report) {
  std::ostringstream os;
  const auto& x = report.recovered;
  const std::optional<CoefficientErrors>& e = report.ground_truth_error;
  os << "coefficient              re              im"
     << (e ? "       abs error" : "") << '\n';
  auto row = [&](const char* name, Complex z, std::optional<double> err) {
    char label[16];
    std::snprintf(label, sizeof label, "%-11s", name);
    os << label << "  " << fixed(z.real()) << "  " << fixed(z.imag());
    if (err) os << "  " << fixed(*err);
    os << '\n';
  };
  auto err = [&](double CoefficientErrors::*m) {
    return e ? std::optional<double>((*e).*m) : std::nullopt;
  };
  row("b1", x.b1, err(&CoefficientErrors::b1));
  row("b2", x.b2, err(&CoefficientErrors::b2));
  row("c1", x.c1, err(&CoefficientErrors::c1));
  row("c2", x.c2, err(&CoefficientErrors::c2));
  row("d12", x.d12, err(&CoefficientErrors::d12));
  row("dbar12", x.dbar12, err(&CoefficientErrors::dbar12));
  if (report.c_symmetric) row("c_sym", *report.c_symmetric, std::nullopt);
  os << '\n' << "step              residual        chi2/dof  flagged\n";
  for (const auto& s : report.residuals) {
    char label[16];
    std::snprintf(label, sizeof label, "%-12s", s.step.c_str());
    os << label << "  " << fixed(s.residual_norm) << "  "
       << (s.chi2_per_dof ? fixed(*s.chi2_per_dof) : std::string(13, ' ') + "-") << "  "
       << (s.flagged ? "yes" : "no") << '\n';
  }
  if (report.self_check) {
    const SelfCheck& s = *report.self_check;
    os << '\n'
       << "self-check  b_p error " << fixed(s.b_p_error(), 0) << "  phi error "
       << fixed(s.phi_error(), 0) << "  purity defect " << fixed(s.purity_defect, 0) << '\n';
  }
  os << '\n'
     << "shots " << shots_label(report.shots) << "  seed " << report.seed << "  physical "
     << (report.physical ? "yes" : "no") << "  flags ";
  if (report.flags.empty()) os << "none";
  for (std::size_t i = 0; i < report.flags.size(); ++i) os << (i ? "," : "") << report.flags[i];
  os << '\n';
  return os.str();
}

RoundtripSummary run_roundtrip(const Scenario& scenario) {
  RoundtripSummary summary;
  auto levels = scenario.roundtrip.shots_sweep;
  if (levels.empty()) levels.push_back(scenario.plan.shots);

  std::vector<TwoModeCoefficients> unknowns;
  for (std::size_t t = 0; t < scenario.roundtrip.trials; ++t) {
    unknowns.push_back(resolve_unknown(scenario.unknown, t));
  }
  for (const auto& shots : levels) {
    RoundtripLevel level;
    level.shots = shots;
    const std::size_t seeds = shots ? scenario.roundtrip.seeds : 1;
    double sum_sq_total = 0.0;
    std::array<double, 6> sum_sq{};
    for (const auto& unknown : unknowns) {
      for (std::size_t s = 0; s < seeds; ++s) {
        ExperimentPlan plan = scenario.plan;
        plan.shots = shots;
        plan.seed = scenario.plan.seed + s;
        const ReconstructionReport report = run_pipeline(unknown, plan);
        const CoefficientErrors& e = *report.ground_truth_error;
        const std::array<double, 6> v{e.b1, e.b2, e.c1, e.c2, e.d12, e.dbar12};
        const std::array<double CoefficientErrors::*, 6> members{
            &CoefficientErrors::b1, &CoefficientErrors::b2,  &CoefficientErrors::c1,
            &CoefficientErrors::c2, &CoefficientErrors::d12, &CoefficientErrors::dbar12};
        for (std::size_t i = 0; i < 6; ++i) {
          sum_sq[i] += v[i] * v[i];
          sum_sq_total += v[i] * v[i];
          level.max.*members[i] = std::max(level.max.*members[i], v[i]);
        }
        ++level.runs;
        if (!report.ok()) ++level.flagged_runs;
      }
    }
    const double n = static_cast<double>(level.runs);
    level.rms = {std::sqrt(sum_sq[0] / n), std::sqrt(sum_sq[1] / n), std::sqrt(sum_sq[2] / n),
                 std::sqrt(sum_sq[3] / n), std::sqrt(sum_sq[4] / n), std::sqrt(sum_sq[5] / n)};
    level.total_rms = std::sqrt(sum_sq_total / (6.0 * n));
    summary.any_flagged = summary.any_flagged || level.flagged_runs > 0;
    summary.levels.push_back(level);
  }

  // Least-squares slope of log(total_rms) against log(shots).
  std::vector<std::pair<double, double>> pts;
  for (const auto& l : summary.levels) {
    if (l.shots && l.total_rms > 0.0) {
      pts.emplace_back(std::log(static_cast<double>(*l.shots)), std::log(l.total_rms));
    }
  }
  if (pts.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (auto [x, y] : pts) {
      mx += x / pts.size();
      my += y / pts.size();
    }
    double sxy = 0.0, sxx = 0.0;
    for (auto [x, y] : pts) {
      sxy += (x - mx) * (y - my);
      sxx += (x - mx) * (x - mx);
    }
    if (sxx > 0.0) summary.slope = sxy / sxx;
  }
  return summary;
}

std::string summary_to_json(const RoundtripSummary& summary) {
  json levels = json::array();
  for (const auto& l : summary.levels) {
    levels.push_back({{"shots", shots_json(l.shots)},
                      {"runs", l.runs},
                      {"flagged_runs", l.flagged_runs},
                      {"rms", errors_json(l.rms)},
                      {"max", errors_json(l.max)},
                      {"total_rms", l.total_rms}});
  }
  json j{{"levels", levels}, {"slope", optional_json(summary.slope)},
         {"any_flagged", summary.any_flagged}};
  return j.dump(2) + "\n";
}

std::string summary_to_csv(const RoundtripSummary& summary) {
  std::ostringstream os;
  os << "shots,runs,flagged_runs,rms_b1,rms_b2,rms_c1,rms_c2,rms_d12,rms_dbar12,total_rms,"
        "max_error\n";
  for (const auto& l : summary.levels) {
    os << shots_label(l.shots) << ',' << l.runs << ',' << l.flagged_runs;
    for (double v : {l.rms.b1, l.rms.b2, l.rms.c1, l.rms.c2, l.rms.d12, l.rms.dbar12,
                     l.total_rms, l.max.max()}) {
      os << ',' << shortest(v);
    }
    os << '\n';
  }
  return os.str();
}

std::string summary_table(const RoundtripSummary& summary) {
  std::ostringstream os;
  os << "     shots   runs  flagged" << "          rms b1          rms b2          rms c1"
     << "          rms c2         rms d12      rms dbar12       max error\n";
  for (const auto& l : summary.levels) {
    char head[48];
    std::snprintf(head, sizeof head, "%10s  %5zu  %7zu", shots_label(l.shots).c_str(), l.runs,
                  l.flagged_runs);
    os << head;
    for (double v : {l.rms.b1, l.rms.b2, l.rms.c1, l.rms.c2, l.rms.d12, l.rms.dbar12,
                     l.max.max()}) {
      os << "  " << fixed(v);
    }
    os << '\n';
  }
  if (summary.slope) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "log-log slope of total rms vs shots: %.4f\n", *summary.slope);
    os << buf;
  }
  return os.str();
}

}  // namespace covrec
