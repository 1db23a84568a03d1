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

// covrec command-line front end: simulate records, reconstruct a state from
// records, or run simulate + reconstruct + compare round trips.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "covrec/scenario.hpp"

namespace fs = std::filesystem;
using namespace covrec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

enum class LogLevel { quiet = 0, error, warn, info, debug };

LogLevel g_level = LogLevel::warn;

void init_logging() {
  const char* env = std::getenv("COVREC_LOG");
  if (!env) return;
  const std::string v(env);
  if (v == "quiet" || v == "off") g_level = LogLevel::quiet;
  else if (v == "error") g_level = LogLevel::error;
  else if (v == "warn") g_level = LogLevel::warn;
  else if (v == "info") g_level = LogLevel::info;
  else if (v == "debug") g_level = LogLevel::debug;
}

void log(LogLevel level, const std::string& msg) {
  static constexpr const char* kNames[] = {"", "error", "warn", "info", "debug"};
  if (level <= g_level) std::cerr << "covrec[" << kNames[static_cast<int>(level)] << "] " << msg << '\n';
}

struct CommonOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string shots;
  std::string format;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Scenario JSON file")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Output directory (overrides the config)");
  cmd->add_option("--seed", o.seed, "Base RNG seed (overrides the config)");
  cmd->add_option("--shots", o.shots, "Frames per record, or 'inf' for exact moments");
  cmd->add_option("--format", o.format, "Record and summary file format")
      ->check(CLI::IsMember({"json", "csv"}));
}

Scenario load(const CommonOptions& o) {
  Scenario s = o.config.empty() ? Scenario{} : load_scenario(o.config);
  if (!o.out.empty()) s.out_dir = o.out;
  if (o.seed) s.plan.seed = *o.seed;
  if (!o.shots.empty()) {
    s.plan.shots = parse_shots(o.shots);
    s.roundtrip.shots_sweep.clear();
  }
  if (!o.format.empty()) s.format = o.format == "csv" ? OutputFormat::csv : OutputFormat::json;
  s.plan.validate();
  return s;
}

void write_file(const fs::path& path, const std::string& text) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::invalid_argument("cannot write " + path.string());
  log(LogLevel::info, "wrote " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string extension(OutputFormat f) { return f == OutputFormat::csv ? ".csv" : ".json"; }

int cmd_simulate(const Scenario& s) {
  const TwoModeCoefficients unknown = resolve_unknown(s.unknown);
  log(LogLevel::debug, "simulating with b_p=" + std::to_string(s.plan.b_p));
  const ExperimentRecords records = simulate_experiment(unknown, s.plan);
  const fs::path path = s.out_dir / ("records" + extension(s.format));
  write_file(path, s.format == OutputFormat::csv ? records_to_csv(records)
                                                 : records_to_json(records, s.plan));
  const std::size_t n = 1 + records.balanced_mix.size() + records.pure_twin.size() +
                        records.single_arm.size();
  std::cout << "wrote " << n << " records to " << path.string() << '\n';
  return kExitOk;
}

int cmd_reconstruct(Scenario s, const std::string& records_path) {
  const fs::path path =
      records_path.empty() ? s.out_dir / ("records" + extension(s.format)) : fs::path(records_path);
  const std::string text = read_file(path);
  ExperimentRecords records;
  if (path.extension() == ".csv") {
    records = records_from_csv(text);
  } else {
    records = records_from_json(text);
    const auto header = nlohmann::json::parse(text);
    if (header.contains("b_p") && header.at("b_p").get<double>() != s.plan.b_p) {
      throw std::invalid_argument("records were taken with a different reference b_p");
    }
    if (header.contains("seed")) s.plan.seed = header.at("seed").get<std::uint64_t>();
  }
  // The records decide whether they are exact.
  s.plan.shots = records.vacuum.shots;
  s.plan.arm = records.arm;

  ReconstructionReport report = reconstruct(records, s.plan);
  if (s.has_unknown) {
    report.ground_truth_error = coefficient_errors(report.recovered, resolve_unknown(s.unknown));
  }
  write_file(s.out_dir / "report.json", report_to_json(report));
  const std::string table = report_table(report);
  write_file(s.out_dir / "report.txt", table);
  std::cout << table;
  for (const auto& f : report.flags) log(LogLevel::warn, "flag: " + f);
  return report.ok() ? kExitOk : kExitNumerical;
}

int cmd_roundtrip(const Scenario& s) {
  const RoundtripSummary summary = run_roundtrip(s);
  write_file(s.out_dir / ("roundtrip" + extension(s.format)),
             s.format == OutputFormat::csv ? summary_to_csv(summary) : summary_to_json(summary));
  const std::string table = summary_table(summary);
  write_file(s.out_dir / "roundtrip.txt", table);
  std::cout << table;
  if (summary.any_flagged) log(LogLevel::warn, "at least one run raised a flag");
  return summary.any_flagged ? kExitNumerical : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Two-mode Gaussian state reconstruction from twin-beam-referenced photocounts"};
  app.require_subcommand(1);

  CommonOptions sim_opts, rec_opts, rt_opts;
  std::string records_path;
  auto* sim = app.add_subcommand("simulate", "Write photocount records for every preparation");
  add_common(sim, sim_opts);
  auto* rec = app.add_subcommand("reconstruct", "Recover the unknown state from records");
  add_common(rec, rec_opts);
  rec->add_option("--records", records_path, "Records file (default <out>/records.<format>)");
  auto* rt = app.add_subcommand("roundtrip", "Simulate, reconstruct and tabulate errors");
  add_common(rt, rt_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*sim) return cmd_simulate(load(sim_opts));
    if (*rec) return cmd_reconstruct(load(rec_opts), records_path);
    return cmd_roundtrip(load(rt_opts));
  } catch (const NumericalError& e) {
    log(LogLevel::error, e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    log(LogLevel::error, e.what());
    return kExitValidation;
  }
}
