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

// katsim run <config> | katsim validate <config>
//
// Exit codes: 0 ok, 1 other failure, 2 config/parse error or invalid
// parameters, 3 numerical failure.

#include <cstdio>
#include <optional>
#include <string>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "katsim/config.hpp"
#include "katsim/errors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int do_validate(const std::string& path) {
  const katsim::ScenarioConfig config = katsim::load_config(path);
  const katsim::ValidationReport report = katsim::validate_config(config);
  for (const auto& line : report.values) fmt::print("{}\n", line);
  for (const auto& w : report.warnings) fmt::print("warning: {}\n", w);
  for (const auto& v : report.violations) fmt::print("violation: {}\n", v);
  if (!report.ok()) {
    fmt::print("invalid\n");
    return kExitConfig;
  }
  fmt::print("valid\n");
  return 0;
}

int do_run(const std::string& path, std::optional<std::string> out, std::optional<int> workers,
           std::optional<double> tol) {
  katsim::ScenarioConfig config = katsim::load_config(path);
  if (tol) {
    if (*tol < 1e-12 || *tol > 1e-6) throw katsim::ConfigError("--tol: must lie in [1e-12, 1e-6]", "--tol");
    config.tolerance = *tol;
  }
  const int w = workers ? *workers : config.workers ? *config.workers : katsim::default_workers();
  const std::string dir = out ? *out : config.output_dir;
  const katsim::RunSummary s = katsim::run_scenario(config, dir, w);
  for (const auto& f : s.files) fmt::print("wrote {}\n", f.string());
  fmt::print("{} runs, {} steps, {:.1f} s\n", s.hygiene.runs, s.hygiene.steps, s.wall_seconds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"katsim: cat-qubit Molmer-Sorensen gate simulator"};
  app.set_version_flag("--version", KATSIM_VERSION);
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->capture_default_str();

  std::string config_path;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::optional<double> tol;
  auto* run = app.add_subcommand("run", "run a scenario and write its CSV and manifest");
  run->add_option("config", config_path, "scenario config (JSON)")->required();
  run->add_option("--out", out, "output directory (overrides output_dir)");
  run->add_option("--workers", workers, "worker threads (default: KATSIM_THREADS or all cores)")
      ->check(CLI::PositiveNumber);
  run->add_option("--tol", tol, "integrator tolerance (overrides tolerance)");

  auto* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("config", config_path, "scenario config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_default_logger(spdlog::stderr_color_mt("katsim"));
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (run->parsed()) return do_run(config_path, out, workers, tol);
    return do_validate(config_path);
  } catch (const katsim::ConfigError& e) {
    fmt::print(stderr, "config error ({}): {}\n", e.field(), e.what());
    return kExitConfig;
  } catch (const katsim::NumericalError& e) {
    fmt::print(stderr, "numerical failure at t = {:.9e} s: {}\n", e.time(), e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}
