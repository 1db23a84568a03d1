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

#ifndef COVREC_SCENARIO_HPP_
#define COVREC_SCENARIO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "covrec/reconstruction.hpp"

namespace covrec {

enum class OutputFormat { json, csv };

/// How the unknown two-mode state of a scenario is obtained.
struct UnknownSpec {
  enum class Kind { coefficients, random, twin, squeezed, vacuum };
  Kind kind = Kind::vacuum;
  TwoModeCoefficients coefficients{};
  /// random: draws from mt19937_64 seeded with derive_seed(seed, trial).
  std::uint64_t seed = 0;
  double max_b = 1.0;
  TwinBeamSource twin{};
  SqueezedSpec squeezed{};
};

struct RoundtripSpec {
  /// Number of unknowns (only differs between trials for random unknowns).
  std::size_t trials = 1;
  /// Seeds per shots level, starting at plan.seed.
  std::size_t seeds = 1;
  /// Shot counts to sweep; empty means the plan's shots only.
  std::vector<std::optional<std::uint64_t>> shots_sweep;
};

struct Scenario {
  UnknownSpec unknown;
  /// False when the config has no "unknown" section.
  bool has_unknown = false;
  ExperimentPlan plan;
  RoundtripSpec roundtrip;
  std::filesystem::path out_dir = "out";
  OutputFormat format = OutputFormat::json;
};

/// Parses a JSON scenario. Angles are in radians, shots and dark counts in
/// counts per window. Throws std::invalid_argument on malformed input.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

/// Throws NumericalError if the resulting state is unphysical.
TwoModeCoefficients resolve_unknown(const UnknownSpec& spec, std::size_t trial = 0);

std::optional<std::uint64_t> parse_shots(std::string_view text);

/// One row per (preparation, phase): vacuum first, then the three sweeps.
std::string records_to_csv(const ExperimentRecords& records);
ExperimentRecords records_from_csv(std::string_view text);
std::string records_to_json(const ExperimentRecords& records, const ExperimentPlan& plan);
ExperimentRecords records_from_json(std::string_view text);

std::string report_to_json(const ReconstructionReport& report);
std::string report_table(const ReconstructionReport& report);

struct RoundtripLevel {
  std::optional<std::uint64_t> shots;
  std::size_t runs = 0;
  std::size_t flagged_runs = 0;
  CoefficientErrors rms{};
  CoefficientErrors max{};
  /// sqrt of the mean over runs and coefficients of the squared error.
  double total_rms = 0.0;
};

struct RoundtripSummary {
  std::vector<RoundtripLevel> levels;
  /// d log(total_rms) / d log(shots) across the finite-shot levels.
  std::optional<double> slope;
  /// Set when a run raised a validation, residual or physicality flag.
  bool any_flagged = false;
};

RoundtripSummary run_roundtrip(const Scenario& scenario);

std::string summary_to_json(const RoundtripSummary& summary);
std::string summary_to_csv(const RoundtripSummary& summary);
std::string summary_table(const RoundtripSummary& summary);

}  // namespace covrec

#endif  // COVREC_SCENARIO_HPP_
