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

#include "katsim/config.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "json.hpp"
#include "katsim/pulses.hpp"

namespace katsim {

using nlohmann::json;

namespace {

const std::map<std::string, Scenario>& scenario_names() {
  static const std::map<std::string, Scenario> names{
      {"truth_table", Scenario::TruthTable},
      {"populations", Scenario::Populations},
      {"trajectory", Scenario::Trajectory},
      {"sweep_timing", Scenario::SweepTiming},
      {"sweep_detuning", Scenario::SweepDetuning},
      {"sweep_coupling", Scenario::SweepCoupling},
      {"sweep_kappa", Scenario::SweepKappa},
      {"sweep_gamma", Scenario::SweepGamma},
      {"sweep_equal", Scenario::SweepEqual},
      {"effective_compare", Scenario::EffectiveCompare},
  };
  return names;
}

json freq(double f, bool angular) { return json{{"f_MHz", f}, {"angular", angular}}; }
json linspace_spec(double a, double b, int n) { return json{{"start", a}, {"stop", b}, {"points", n}}; }

json defaults() {
  return json{
      {"params",
       {{"alpha", 2.0},
        {"K", freq(20.0, false)},
        {"J", freq(1.0, false)},
        {"Omega_p", nullptr},
        {"Delta", nullptr},
        {"zeta", nullptr},
        {"gate_time_ns", nullptr},
        {"cutoffs", {{"kpo", nullptr}, {"cavity", 8}, {"kerr_levels", 0}}}}},
      {"N", 1},
      {"N_list", {1, 2, 4, 8}},
      {"grid", linspace_spec(-0.1, 0.1, 41)},
      {"rates",
       {{"kappa_MHz", linspace_spec(0.0, 0.1, 11)}, {"gamma_MHz", linspace_spec(0.0, 0.1, 11)}, {"angular", true}}},
      {"models", {"ideal", "effective", "full"}},
      {"window", 2.5},
      {"samples", 400},
      {"trajectory_points", 512},
      {"timing_errors", {0.0, 0.1}},
      {"compare_kappa_MHz", 0.05},
      {"output_dir", "out"},
      {"tolerance", 1e-9},
      {"workers", nullptr},
  };
}

// Objects whose keys are merged one by one; every other value is replaced whole.
const std::set<std::string> kStructs{"", "params", "params.cutoffs", "rates"};

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void merge(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError(fmt::format("{}: expected an object", path.empty() ? "<root>" : path), path);
  for (const auto& [key, value] : user.items()) {
    const std::string field = join(path, key);
    if (path.empty() && key == "manifest") continue;
    if (path.empty() && key == "scenario") {
      base[key] = value;
      continue;
    }
    if (!base.contains(key)) throw ConfigError(fmt::format("{}: unknown field", field), field);
    if (kStructs.count(field)) {
      merge(base[key], value, field);
    } else {
      base[key] = value;
    }
  }
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(fmt::format("{}: expected a number", field), field);
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(fmt::format("{}: must be finite", field), field);
  return v;
}

long integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError(fmt::format("{}: expected an integer", field), field);
  return j.get<long>();
}

double positive(const json& j, const std::string& field) {
  const double v = number(j, field);
  if (!(v > 0.0)) throw ConfigError(fmt::format("{}: must be positive", field), field);
  return v;
}

// Angular frequency in rad/s from {"f_MHz": x, "angular": b}.
double frequency(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(fmt::format("{}: expected {{\"f_MHz\": ..., \"angular\": ...}}", field), field);
  for (const auto& [key, _] : j.items()) {
    if (key != "f_MHz" && key != "angular") throw ConfigError(fmt::format("{}.{}: unknown field", field, key), field);
  }
  if (!j.contains("f_MHz")) throw ConfigError(fmt::format("{}.f_MHz: missing", field), field + ".f_MHz");
  if (!j.contains("angular") || !j.at("angular").is_boolean()) {
    throw ConfigError(fmt::format("{}.angular: expected true or false", field), field + ".angular");
  }
  const double f = number(j.at("f_MHz"), field + ".f_MHz");
  return j.at("angular").get<bool>() ? f * 1e6 : mhz(f);
}

std::vector<double> grid(const json& j, const std::string& field) {
  std::vector<double> out;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], fmt::format("{}[{}]", field, i)));
  } else if (j.is_object()) {
    for (const auto& [key, _] : j.items()) {
      if (key != "start" && key != "stop" && key != "points") {
        throw ConfigError(fmt::format("{}.{}: unknown field", field, key), field);
      }
    }
    if (!j.contains("start") || !j.contains("stop") || !j.contains("points")) {
      throw ConfigError(fmt::format("{}: linspace needs start, stop and points", field), field);
    }
    const double a = number(j.at("start"), field + ".start");
    const double b = number(j.at("stop"), field + ".stop");
    const long n = integer(j.at("points"), field + ".points");
    if (n < 1) throw ConfigError(fmt::format("{}.points: must be at least 1", field), field + ".points");
    for (long i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / (n - 1));
    if (n > 1) out.back() = b;
  } else {
    throw ConfigError(fmt::format("{}: expected an array or {{start, stop, points}}", field), field);
  }
  if (out.empty()) throw ConfigError(fmt::format("{}: must not be empty", field), field);
  return out;
}

SystemParams params_from(const json& p) {
  SystemParams s;
  s.alpha = positive(p.at("alpha"), "params.alpha");
  s.K = frequency(p.at("K"), "params.K");
  s.J = frequency(p.at("J"), "params.J");
  s.Omega_p = p.at("Omega_p").is_null() ? s.K * s.alpha * s.alpha : frequency(p.at("Omega_p"), "params.Omega_p");
  s.Delta = p.at("Delta").is_null() ? 4.0 * s.J * s.alpha : frequency(p.at("Delta"), "params.Delta");
  s.Delta_drive = s.Delta;
  s.zeta = p.at("zeta").is_null() ? std::abs(s.Delta) : frequency(p.at("zeta"), "params.zeta");
  s.gate_time = p.at("gate_time_ns").is_null() ? kTwoPi / s.zeta
                                               : positive(p.at("gate_time_ns"), "params.gate_time_ns") * 1e-9;
  const json& c = p.at("cutoffs");
  s.cutoffs.kpo = c.at("kpo").is_null() ? default_kpo_cutoff(s.alpha)
                                        : static_cast<int>(integer(c.at("kpo"), "params.cutoffs.kpo"));
  s.cutoffs.cavity = static_cast<int>(integer(c.at("cavity"), "params.cutoffs.cavity"));
  s.cutoffs.kerr_levels = static_cast<int>(integer(c.at("kerr_levels"), "params.cutoffs.kerr_levels"));
  if (s.cutoffs.kpo < 2) throw ConfigError("params.cutoffs.kpo: must be at least 2", "params.cutoffs.kpo");
  if (s.cutoffs.cavity < 2) throw ConfigError("params.cutoffs.cavity: must be at least 2", "params.cutoffs.cavity");
  if (s.cutoffs.kerr_levels < 0 || s.cutoffs.kerr_levels == 1 || s.cutoffs.kerr_levels > s.cutoffs.kpo) {
    throw ConfigError("params.cutoffs.kerr_levels: must be 0 or in [2, kpo]", "params.cutoffs.kerr_levels");
  }
  return s.with_tones(1);
}

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return fmt::format("line {}, column {}", line, col);
}

std::string freq_line(const std::string& name, double omega) {
  const double f = omega / kTwoPi;
  return fmt::format("{:<10} = 2π·{:.6g} MHz  ({:.6e} Hz, {:.6e} rad/s)", name, f / 1e6, f, omega);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << content;
  if (!out) throw Error(fmt::format("failed writing {}", path.string()));
}

json hygiene_json(const Hygiene& h) {
  return json{{"runs", h.runs},
              {"steps", h.steps},
              {"rejected_steps", h.rejected},
              {"tolerance", h.tolerance},
              {"max_norm_drift", h.max_norm_drift},
              {"max_hermiticity_deviation", h.max_hermiticity_deviation},
              {"min_eigenvalue", h.density_runs > 0 ? json(h.min_eigenvalue) : json(nullptr)}};
}

}  // namespace

std::string to_string(Scenario s) {
  for (const auto& [name, value] : scenario_names()) {
    if (value == s) return name;
  }
  return "?";
}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
  json user;
  try {
    user = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}: {}", source, line_col(text, e.byte), e.what()), "<syntax>");
  }
  json tree = defaults();
  merge(tree, user, "");
  if (!tree.contains("scenario")) throw ConfigError("scenario: missing", "scenario");
  if (!tree.at("scenario").is_string()) throw ConfigError("scenario: expected a string", "scenario");

  ScenarioConfig c;
  const std::string name = tree.at("scenario").get<std::string>();
  const auto it = scenario_names().find(name);
  if (it == scenario_names().end()) throw ConfigError(fmt::format("scenario: unknown scenario '{}'", name), "scenario");
  c.scenario = it->second;
  c.params = params_from(tree.at("params"));

  c.N = static_cast<int>(integer(tree.at("N"), "N"));
  if (c.N < 1) throw ConfigError("N: must be at least 1", "N");
  const json& nl = tree.at("N_list");
  if (!nl.is_array() || nl.empty()) throw ConfigError("N_list: expected a non-empty array", "N_list");
  c.N_list.clear();
  for (std::size_t i = 0; i < nl.size(); ++i) {
    const long n = integer(nl[i], fmt::format("N_list[{}]", i));
    if (n < 1) throw ConfigError(fmt::format("N_list[{}]: must be at least 1", i), "N_list");
    c.N_list.push_back(static_cast<int>(n));
  }
  c.grid = grid(tree.at("grid"), "grid");
  for (double d : c.grid) {
    if (!(d > -1.0)) throw ConfigError("grid: relative errors must exceed -1", "grid");
  }
  const json& rates = tree.at("rates");
  c.kappa_grid_MHz = grid(rates.at("kappa_MHz"), "rates.kappa_MHz");
  c.gamma_grid_MHz = grid(rates.at("gamma_MHz"), "rates.gamma_MHz");
  for (double r : c.kappa_grid_MHz) {
    if (r < 0.0) throw ConfigError("rates.kappa_MHz: rates must be non-negative", "rates.kappa_MHz");
  }
  for (double r : c.gamma_grid_MHz) {
    if (r < 0.0) throw ConfigError("rates.gamma_MHz: rates must be non-negative", "rates.gamma_MHz");
  }
  if (!rates.at("angular").is_boolean()) throw ConfigError("rates.angular: expected true or false", "rates.angular");
  c.rate_convention = rates.at("angular").get<bool>() ? RateConvention::Angular : RateConvention::Cyclic;

  const json& models = tree.at("models");
  if (!models.is_array() || models.empty()) throw ConfigError("models: expected a non-empty array", "models");
  c.models.clear();
  for (const auto& m : models) {
    const std::string s = m.is_string() ? m.get<std::string>() : "";
    if (s == "ideal") {
      c.models.push_back(GateModel::Ideal);
    } else if (s == "effective") {
      c.models.push_back(GateModel::Effective);
    } else if (s == "full") {
      c.models.push_back(GateModel::Full);
    } else {
      throw ConfigError("models: entries must be \"ideal\", \"effective\" or \"full\"", "models");
    }
  }
  c.window = positive(tree.at("window"), "window");
  const long samples = integer(tree.at("samples"), "samples");
  if (samples < 2) throw ConfigError("samples: must be at least 2", "samples");
  c.samples = static_cast<std::size_t>(samples);
  const long tp = integer(tree.at("trajectory_points"), "trajectory_points");
  if (tp < 2) throw ConfigError("trajectory_points: must be at least 2", "trajectory_points");
  c.trajectory_points = static_cast<std::size_t>(tp);
  c.timing_errors = grid(tree.at("timing_errors"), "timing_errors");
  c.compare_kappa_MHz = number(tree.at("compare_kappa_MHz"), "compare_kappa_MHz");
  if (c.compare_kappa_MHz < 0.0) throw ConfigError("compare_kappa_MHz: must be non-negative", "compare_kappa_MHz");
  if (!tree.at("output_dir").is_string()) throw ConfigError("output_dir: expected a string", "output_dir");
  c.output_dir = tree.at("output_dir").get<std::string>();
  c.tolerance = positive(tree.at("tolerance"), "tolerance");
  if (c.tolerance < 1e-12 || c.tolerance > 1e-6) {
    throw ConfigError("tolerance: must lie in [1e-12, 1e-6]", "tolerance");
  }
  if (!tree.at("workers").is_null()) {
    const long w = integer(tree.at("workers"), "workers");
    if (w < 1) throw ConfigError("workers: must be a positive integer", "workers");
    c.workers = static_cast<int>(w);
  }
  c.resolved_json = tree.dump(2);
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("{}: cannot open", path.string()), "<file>");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

ValidationReport validate_config(const ScenarioConfig& config) {
  ValidationReport r;
  const SystemParams& p = config.params;
  r.values.push_back(fmt::format("{:<10} = {}", "scenario", to_string(config.scenario)));
  r.values.push_back(fmt::format("{:<10} = {:.6g}", "alpha", p.alpha));
  r.values.push_back(freq_line("K", p.K));
  r.values.push_back(freq_line("Omega_p", p.Omega_p));
  r.values.push_back(freq_line("J", p.J));
  r.values.push_back(freq_line("Delta", p.Delta));
  r.values.push_back(freq_line("zeta", p.zeta));
  r.values.push_back(fmt::format("{:<10} = {:.6f} ns", "gate_time", p.gate_time * 1e9));
  r.values.push_back(fmt::format("{:<10} = kpo {}, cavity {}, kerr_levels {}", "cutoffs", p.cutoffs.kpo,
                                 p.cutoffs.cavity, p.cutoffs.kerr_levels));

  for (const auto& v : p.invariant_violations()) {
    // with_tones(1) is a placeholder; N-dependent weights are set per run.
    if (v.rfind("weights", 0) == 0) continue;
    r.violations.push_back(v);
  }

  const int need_kpo = default_kpo_cutoff(p.alpha);
  if (p.cutoffs.kpo < need_kpo) {
    r.warnings.push_back(fmt::format("cutoffs.kpo: a cat of amplitude {:.3g} needs >= {} levels, have {}", p.alpha,
                                     need_kpo, p.cutoffs.kpo));
  }
  std::vector<int> ns = config.N_list;
  if (config.scenario == Scenario::TruthTable) ns = {config.N};
  double disp = 0.0;
  if (p.zeta > 0.0) {
    for (int n : ns) disp = std::max(disp, max_bus_displacement(p.with_tones(n)));
  }
  const int need_cav = static_cast<int>(std::ceil(disp * disp + 5.0 * disp - 1e-9));
  if (p.cutoffs.cavity < need_cav) {
    r.warnings.push_back(fmt::format("cutoffs.cavity: displacement amplitude {:.3g} needs >= {} levels, have {}",
                                     disp, need_cav, p.cutoffs.cavity));
  }
  const bool master = config.scenario == Scenario::SweepKappa || config.scenario == Scenario::SweepGamma ||
                      config.scenario == Scenario::SweepEqual || config.scenario == Scenario::EffectiveCompare;
  if (master && p.cutoffs.kerr_levels == 0) {
    const long dim = static_cast<long>(p.cutoffs.kpo) * p.cutoffs.kpo * p.cutoffs.cavity;
    if (dim > 1000) {
      r.warnings.push_back(fmt::format(
          "cutoffs.kerr_levels: master equation on {} Fock states will be slow; consider kerr_levels 6-8", dim));
    }
  }
  if (config.scenario == Scenario::TruthTable && config.N_list != std::vector<int>{1, 2, 4, 8}) {
    r.warnings.push_back("N_list: ignored by truth_table, which uses N");
  }
  return r;
}

RunSummary run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir, int workers) {
  const ValidationReport report = validate_config(config);
  if (!report.ok()) {
    const std::string& v = report.violations.front();
    throw ConfigError(fmt::format("invalid parameters: {}", v), v.substr(0, v.find(':')));
  }
  for (const auto& w : report.warnings) spdlog::warn("{}", w);

  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);
  RunSummary summary;
  const RunOptions ro{config.tolerance, std::max(workers, 1)};
  const SystemParams& base = config.params;
  json extra = json::object();

  auto emit = [&](const std::string& name, const std::string& content) {
    const auto path = out_dir / name;
    write_file(path, content);
    summary.files.push_back(path);
  };

  std::ostringstream csv;
  switch (config.scenario) {
    case Scenario::TruthTable: {
      const SystemParams p = base.with_tones(config.N);
      std::vector<TruthRow> rows;
      for (GateModel m : config.models) {
        TruthTable t = run_truth_table(p, m, ro);
        summary.hygiene.absorb(t.hygiene);
        rows.insert(rows.end(), t.rows.begin(), t.rows.end());
      }
      write_truth_table_csv(csv, rows);
      emit("truth_table.csv", csv.str());
      break;
    }
    case Scenario::Populations: {
      std::vector<std::pair<int, EvolutionResult>> traces(config.N_list.size());
      parallel_for(config.N_list.size(), ro.workers, [&](std::size_t i) {
        const int n = config.N_list[i];
        traces[i] = {n, population_trace(base.with_tones(n), config.window, config.samples, config.tolerance)};
      });
      json windows = json::object();
      for (const auto& [n, r] : traces) {
        summary.hygiene.absorb(r);
        windows[std::to_string(n)] = dwell_window(r.times, r.records.at("C+C+0"), r.records.at("C-C-0"), 0.4, 0.6,
                                                  base.with_tones(n).gate_time) *
                                     1e9;
      }
      extra["dwell_window_ns"] = windows;
      write_populations_csv(csv, traces, {"C+C+0", "C-C-0"});
      emit("populations.csv", csv.str());
      break;
    }
    case Scenario::Trajectory: {
      write_trajectory_csv(csv, trajectory_dataset(base, config.N_list, config.timing_errors,
                                                   config.trajectory_points));
      emit("trajectory.csv", csv.str());
      break;
    }
    case Scenario::SweepTiming:
    case Scenario::SweepDetuning:
    case Scenario::SweepCoupling: {
      const ErrorKind kind = config.scenario == Scenario::SweepTiming     ? ErrorKind::Timing
                             : config.scenario == Scenario::SweepDetuning ? ErrorKind::Detuning
                                                                          : ErrorKind::Coupling;
      const SweepResult s = sweep_error(base, kind, config.grid, config.N_list, ro);
      summary.hygiene.absorb(s.hygiene);
      write_sweep_csv(csv, s);
      emit("sweep.csv", csv.str());
      break;
    }
    case Scenario::SweepKappa:
    case Scenario::SweepGamma:
    case Scenario::SweepEqual: {
      const DecoherenceMode mode = config.scenario == Scenario::SweepKappa   ? DecoherenceMode::KappaOnly
                                   : config.scenario == Scenario::SweepGamma ? DecoherenceMode::GammaOnly
                                                                             : DecoherenceMode::Equal;
      const SweepResult s = sweep_decoherence(base, config.kappa_grid_MHz, config.gamma_grid_MHz, config.N_list, mode,
                                              config.rate_convention, ro);
      summary.hygiene.absorb(s.hygiene);
      extra["rate_convention"] = to_string(config.rate_convention);
      write_decoherence_csv(csv, s);
      emit("decoherence.csv", csv.str());
      break;
    }
    case Scenario::EffectiveCompare: {
      const NoiseComparison cmp =
          effective_noise_compare(base, rate_from_mhz(config.compare_kappa_MHz, config.rate_convention),
                                  config.samples, config.tolerance);
      summary.hygiene.absorb(cmp.hygiene);
      extra["rate_convention"] = to_string(config.rate_convention);
      extra["max_deviation"] = cmp.max_deviation;
      csv << "t_ns,full,effective\n";
      for (std::size_t i = 0; i < cmp.times.size(); ++i) {
        csv << fmt::format("{},{},{}\n", cmp.times[i] * 1e9, cmp.full[i], cmp.effective[i]);
      }
      emit("effective_compare.csv", csv.str());
      break;
    }
  }

  summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest = json::parse(config.resolved_json);
  // Command-line overrides belong to the resolved config, so a manifest re-run
  // repeats exactly this run.
  manifest["tolerance"] = config.tolerance;
  manifest["workers"] = ro.workers;
  json files = json::array();
  for (const auto& f : summary.files) files.push_back(f.filename().string());
  manifest["manifest"] = json{
      {"version", KATSIM_VERSION},
      {"scenario", to_string(config.scenario)},
      {"params_fingerprint", base.fingerprint()},
      {"resolved_params",
       {{"alpha", base.alpha},
        {"K_rad_s", base.K},
        {"Omega_p_rad_s", base.Omega_p},
        {"J_rad_s", base.J},
        {"Delta_rad_s", base.Delta},
        {"zeta_rad_s", base.zeta},
        {"gate_time_s", base.gate_time},
        {"cutoffs",
         {{"kpo", base.cutoffs.kpo}, {"cavity", base.cutoffs.cavity}, {"kerr_levels", base.cutoffs.kerr_levels}}}}},
      {"integrator", hygiene_json(summary.hygiene)},
      {"workers", ro.workers},
      {"wall_seconds", summary.wall_seconds},
      {"files", files},
      {"results", extra},
  };
  emit("manifest.json", manifest.dump(2) + "\n");
  return summary;
}

}  // namespace katsim
