// Copyright 2026 The katsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "katsim/experiments.hpp"
#include "katsim/hamiltonians.hpp"

namespace katsim {

enum class Scenario {
  TruthTable,
  Populations,
  Trajectory,
  SweepTiming,
  SweepDetuning,
  SweepCoupling,
  SweepKappa,
  SweepGamma,
  SweepEqual,
  EffectiveCompare,
};

std::string to_string(Scenario s);

/// A parsed scenario file. Frequencies are written as
///   {"f_MHz": 20, "angular": false}
/// where angular=false means the number is f = omega / 2pi and angular=true
/// means it is already omega (both in units of 1e6). See configs/ for samples.
struct ScenarioConfig {
  Scenario scenario = Scenario::TruthTable;
  SystemParams params;
  int N = 1;  // truth_table only
  std::vector<int> N_list{1, 2, 4, 8};
  std::vector<double> grid;
  std::vector<double> kappa_grid_MHz;
  std::vector<double> gamma_grid_MHz;
  RateConvention rate_convention = RateConvention::Angular;
  std::vector<GateModel> models{GateModel::Ideal, GateModel::Effective, GateModel::Full};
  double window = 2.5;
  std::size_t samples = 400;
  std::size_t trajectory_points = 512;
  std::vector<double> timing_errors{0.0, 0.1};
  double compare_kappa_MHz = 0.05;
  std::string output_dir = "out";
  double tolerance = 1e-9;
  std::optional<int> workers;

  /// The configuration tree with every default filled in, as JSON text.
  /// Feeding it back through parse_config gives the same ScenarioConfig.
  std::string resolved_json;
};

/// Strict parse: unknown keys and wrong types raise ConfigError naming the
/// field; malformed JSON raises ConfigError with line and column. A top-level
/// "manifest" key is ignored, so a run manifest is itself a valid config.
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<string>");
ScenarioConfig load_config(const std::filesystem::path& path);

struct ValidationReport {
  std::vector<std::string> values;      // resolved physical values, Hz and rad/s
  std::vector<std::string> violations;  // broken invariants
  std::vector<std::string> warnings;    // cutoff heuristics and similar
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_config(const ScenarioConfig& config);

struct RunSummary {
  std::vector<std::filesystem::path> files;
  Hygiene hygiene;
  double wall_seconds = 0.0;
};

/// Runs the scenario and writes its CSV plus manifest.json into `out_dir`.
/// Throws ConfigError when the parameters violate an invariant.
RunSummary run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir, int workers);

}  // namespace katsim
