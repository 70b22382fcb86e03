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

#include "katsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>
#include <tuple>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "katsim/pulses.hpp"

namespace katsim {

namespace {

CatSign flip(CatSign s) { return s == CatSign::Plus ? CatSign::Minus : CatSign::Plus; }

Ket qubit_ket(CatSign s) {
  Vector v = Vector::Zero(2);
  v(s == CatSign::Plus ? 0 : 1) = 1.0;
  return Ket(HilbertSpace::single(2, "qubit"), v);
}

Ket effective_input(int cavity_cutoff, CatSign s1, CatSign s2) {
  const std::vector<Ket> parts{qubit_ket(s1), qubit_ket(s2), fock_state(0, cavity_cutoff)};
  return product_state(effective_space(cavity_cutoff), parts);
}

Ket superpose(const Ket& in, const Ket& flipped) {
  const cplx i(0.0, 1.0);
  return Ket(in.space(), (in.amplitudes() + i * flipped.amplitudes()) / std::numbers::sqrt2);
}

// Re-raise a numerical failure with the scenario row attached.
[[noreturn]] void rethrow_with_row(const NumericalError& e, const std::string& row) {
  throw NumericalError(fmt::format("{} [{}]", e.what(), row), e.time());
}

void sort_rows(std::vector<SweepRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.N, a.kind, a.delta, a.kappa_MHz, a.gamma_MHz) <
           std::tie(b.N, b.kind, b.delta, b.kappa_MHz, b.gamma_MHz);
  });
}

}  // namespace

// ---------------------------------------------------------------------------

double fidelity(const Ket& target, const Ket& state) {
  if (!(target.space() == state.space())) throw SpaceMismatchError("fidelity: states on different spaces");
  return std::norm(target.amplitudes().dot(state.amplitudes()));
}

double fidelity(const Ket& target, const DensityOperator& state) {
  if (!(target.space() == state.space())) throw SpaceMismatchError("fidelity: states on different spaces");
  const Vector& t = target.amplitudes();
  return t.dot(state.matrix() * t).real();
}

std::string input_label(CatSign s1, CatSign s2) {
  auto c = [](CatSign s) { return s == CatSign::Plus ? "C+" : "C-"; };
  return std::string(c(s1)) + c(s2);
}

Ket full_target(const FullModel& model, CatSign s1, CatSign s2) {
  return superpose(model.cat_product(s1, s2), model.cat_product(flip(s1), flip(s2)));
}

Ket effective_target(int cavity_cutoff, CatSign s1, CatSign s2) {
  return superpose(effective_input(cavity_cutoff, s1, s2), effective_input(cavity_cutoff, flip(s1), flip(s2)));
}

Ket qubit_target(CatSign s1, CatSign s2) {
  const HilbertSpace space({{"q1", 2}, {"q2", 2}});
  const std::vector<Ket> in{qubit_ket(s1), qubit_ket(s2)};
  const std::vector<Ket> out{qubit_ket(flip(s1)), qubit_ket(flip(s2))};
  return superpose(product_state(space, in), product_state(space, out));
}

std::string to_string(GateModel model) {
  switch (model) {
    case GateModel::Full: return "full";
    case GateModel::Effective: return "effective";
    case GateModel::Ideal: return "ideal";
  }
  return "?";
}

void Hygiene::absorb(const EvolutionResult& r) {
  ++runs;
  steps += r.stats.steps;
  rejected += r.stats.rejected;
  tolerance = std::max(tolerance, r.stats.tolerance);
  max_norm_drift = std::max(max_norm_drift, r.max_norm_drift);
  max_hermiticity_deviation = std::max(max_hermiticity_deviation, r.max_hermiticity_deviation);
  if (std::holds_alternative<DensityOperator>(r.final_state)) {
    ++density_runs;
    min_eigenvalue = std::min(min_eigenvalue, r.min_eigenvalue);
  }
}

void Hygiene::absorb(const Hygiene& o) {
  runs += o.runs;
  density_runs += o.density_runs;
  steps += o.steps;
  rejected += o.rejected;
  tolerance = std::max(tolerance, o.tolerance);
  max_norm_drift = std::max(max_norm_drift, o.max_norm_drift);
  max_hermiticity_deviation = std::max(max_hermiticity_deviation, o.max_hermiticity_deviation);
  min_eigenvalue = std::min(min_eigenvalue, o.min_eigenvalue);
}

// ---------------------------------------------------------------------------

TruthTable run_truth_table(const SystemParams& params, GateModel model, const RunOptions& options) {
  TruthTable table;
  table.rows.resize(kGateInputs.size());

  if (model == GateModel::Ideal) {
    const Operator gate = ms_gate_ideal();
    for (std::size_t k = 0; k < kGateInputs.size(); ++k) {
      const auto [s1, s2] = kGateInputs[k];
      const std::vector<Ket> parts{qubit_ket(s1), qubit_ket(s2)};
      const Ket in = product_state(gate.space(), parts);
      const Ket out(gate.space(), gate.apply(in.amplitudes()));
      table.rows[k] = {input_label(s1, s2), model, fidelity(qubit_target(s1, s2), out)};
    }
    return table;
  }

  if (model == GateModel::Effective) {
    const MagnusModel form = params.N == 1 ? MagnusModel::SingleTone : MagnusModel::Composite;
    const Operator u = magnus_propagator(params, params.gate_time, form);
    const int cav = params.cutoffs.cavity;
    for (std::size_t k = 0; k < kGateInputs.size(); ++k) {
      const auto [s1, s2] = kGateInputs[k];
      const Ket out(u.space(), u.apply(effective_input(cav, s1, s2).amplitudes()));
      table.rows[k] = {input_label(s1, s2), model, fidelity(effective_target(cav, s1, s2), out)};
    }
    return table;
  }

  const FullModel full(params);
  const TimeDependentOperator H = full_hamiltonian(params, full);
  std::vector<Hygiene> hyg(kGateInputs.size());
  parallel_for(kGateInputs.size(), options.workers, [&](std::size_t k) {
    const auto [s1, s2] = kGateInputs[k];
    EvolveOptions eo;
    eo.tol = options.tol;
    eo.samples = 2;
    const Probes probes{{{"target", full_target(full, s1, s2)}}, {}};
    try {
      const EvolutionResult r = evolve_state(H, full.cat_product(s1, s2), 0.0, params.gate_time, eo, probes);
      table.rows[k] = {input_label(s1, s2), model, r.records.at("target").back()};
      hyg[k].absorb(r);
    } catch (const NumericalError& e) {
      rethrow_with_row(e, fmt::format("truth_table input={} N={}", input_label(s1, s2), params.N));
    }
  });
  for (const auto& h : hyg) table.hygiene.absorb(h);
  return table;
}

// ---------------------------------------------------------------------------

EvolutionResult population_trace(const SystemParams& params, double window, std::size_t samples, double tol) {
  const FullModel model(params);
  const std::vector<std::pair<std::string, Ket>> labels{
      {"C+C+0", model.cat_product(CatSign::Plus, CatSign::Plus)},
      {"C-C-0", model.cat_product(CatSign::Minus, CatSign::Minus)},
  };
  return population_trace(params, labels[0].second, labels, window, samples, tol);
}

EvolutionResult population_trace(const SystemParams& params, const Ket& initial,
                                 const std::vector<std::pair<std::string, Ket>>& labels, double window,
                                 std::size_t samples, double tol) {
  if (!(window > 0.0)) throw InvalidArgumentError("population_trace: window must be positive");
  for (const auto& [label, ket] : labels) {
    if (std::abs(ket.norm() - 1.0) > 1e-10) {
      throw InvalidArgumentError(fmt::format("population_trace: label '{}' is not normalized", label));
    }
  }
  const FullModel model(params);
  const TimeDependentOperator H = full_hamiltonian(params, model);
  EvolveOptions eo;
  eo.tol = tol;
  eo.samples = samples;
  Probes probes;
  probes.overlaps = labels;
  try {
    return evolve_state(H, initial, 0.0, window * params.gate_time, eo, probes);
  } catch (const NumericalError& e) {
    rethrow_with_row(e, fmt::format("populations N={}", params.N));
  }
}

double dwell_window(const std::vector<double>& times, const std::vector<double>& p1, const std::vector<double>& p2,
                    double lo, double hi, double t_center) {
  const std::size_t n = times.size();
  if (n == 0 || p1.size() != n || p2.size() != n) throw InvalidArgumentError("dwell_window: length mismatch");
  auto in_band = [&](double v) { return v >= lo && v <= hi; };
  auto inside = [&](std::size_t i) { return in_band(p1[i]) && in_band(p2[i]); };

  const auto it = std::lower_bound(times.begin(), times.end(), t_center);
  std::size_t c = static_cast<std::size_t>(std::distance(times.begin(), it));
  if (c == n) c = n - 1;
  if (c > 0 && std::abs(times[c - 1] - t_center) < std::abs(times[c] - t_center)) --c;
  if (!inside(c)) return 0.0;

  // Exit time between an inside sample and its outside neighbour.
  auto crossing = [&](std::size_t in, std::size_t out) {
    double best = times[out];
    for (const auto* p : {&p1, &p2}) {
      const double a = (*p)[in];
      const double b = (*p)[out];
      if (in_band(b)) continue;
      const double edge = b > hi ? hi : lo;
      const double s = (edge - a) / (b - a);
      const double t = times[in] + s * (times[out] - times[in]);
      if (std::abs(t - times[in]) < std::abs(best - times[in])) best = t;
    }
    return best;
  };

  std::size_t l = c;
  while (l > 0 && inside(l - 1)) --l;
  const double t_lo = l == 0 ? times.front() : crossing(l, l - 1);
  std::size_t r = c;
  while (r + 1 < n && inside(r + 1)) ++r;
  const double t_hi = r + 1 == n ? times.back() : crossing(r, r + 1);
  return t_hi - t_lo;
}

// ---------------------------------------------------------------------------

std::string to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Timing: return "timing";
    case ErrorKind::Detuning: return "detuning";
    case ErrorKind::Coupling: return "coupling";
  }
  return "?";
}

SystemParams apply_error(const SystemParams& params, ErrorKind kind, double delta) {
  if (!(delta > -1.0)) throw InvalidArgumentError(fmt::format("relative error {} must exceed -1", delta));
  SystemParams p = params;
  switch (kind) {
    case ErrorKind::Timing: p.gate_time *= 1.0 + delta; break;
    case ErrorKind::Detuning: p.Delta *= 1.0 + delta; break;
    case ErrorKind::Coupling: p.J *= 1.0 + delta; break;
  }
  return p;
}

std::string to_string(DecoherenceMode mode) {
  switch (mode) {
    case DecoherenceMode::KappaOnly: return "kappa_only";
    case DecoherenceMode::GammaOnly: return "gamma_only";
    case DecoherenceMode::Equal: return "equal";
  }
  return "?";
}

std::string to_string(RateConvention c) { return c == RateConvention::Angular ? "angular" : "cyclic"; }

double rate_from_mhz(double value_mhz, RateConvention c) {
  return c == RateConvention::Angular ? value_mhz * 1e6 : mhz(value_mhz);
}

SweepResult sweep_error(const SystemParams& params, ErrorKind kind, const std::vector<double>& grid,
                        const std::vector<int>& N_list, const RunOptions& options) {
  if (grid.empty() || N_list.empty()) throw InvalidArgumentError("sweep_error: empty grid or N list");
  for (double d : grid) {
    if (!(d > -1.0)) throw InvalidArgumentError(fmt::format("sweep_error: relative error {} must exceed -1", d));
  }
  SweepResult result;
  result.params_fingerprint = params.fingerprint();
  const std::string kind_name = to_string(kind);

  if (kind == ErrorKind::Timing) {
    // One run per N, sampled at every (1 + delta) T.
    std::vector<double> sorted = grid;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<std::vector<SweepRow>> rows(N_list.size());
    std::vector<Hygiene> hyg(N_list.size());
    parallel_for(N_list.size(), options.workers, [&](std::size_t j) {
      const SystemParams p = params.with_tones(N_list[j]);
      const FullModel model(p);
      const TimeDependentOperator H = full_hamiltonian(p, model);
      EvolveOptions eo;
      eo.tol = options.tol;
      for (double d : sorted) eo.sample_times.push_back((1.0 + d) * p.gate_time);
      const double t_end = eo.sample_times.back();
      const Probes probes{{{"target", full_target(model, CatSign::Plus, CatSign::Plus)}}, {}};
      try {
        const EvolutionResult r =
            evolve_state(H, model.cat_product(CatSign::Plus, CatSign::Plus), 0.0, t_end, eo, probes);
        const auto& f = r.records.at("target");
        for (double d : grid) {
          const auto k = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), d) - sorted.begin());
          rows[j].push_back({p.N, kind_name, d, 0.0, 0.0, f[k]});
        }
        hyg[j].absorb(r);
      } catch (const NumericalError& e) {
        rethrow_with_row(e, fmt::format("sweep_timing N={}", p.N));
      }
    });
    for (std::size_t j = 0; j < N_list.size(); ++j) {
      result.rows.insert(result.rows.end(), rows[j].begin(), rows[j].end());
      result.hygiene.absorb(hyg[j]);
    }
    sort_rows(result.rows);
    return result;
  }

  const std::size_t total = N_list.size() * grid.size();
  result.rows.resize(total);
  std::vector<Hygiene> hyg(total);
  parallel_for(total, options.workers, [&](std::size_t idx) {
    const int N = N_list[idx / grid.size()];
    const double d = grid[idx % grid.size()];
    const SystemParams ideal = params.with_tones(N);
    const SystemParams p = apply_error(ideal, kind, d);
    const FullModel model(p);
    const TimeDependentOperator H = full_hamiltonian(p, model);
    EvolveOptions eo;
    eo.tol = options.tol;
    eo.samples = 2;
    const Probes probes{{{"target", full_target(model, CatSign::Plus, CatSign::Plus)}}, {}};
    try {
      const EvolutionResult r =
          evolve_state(H, model.cat_product(CatSign::Plus, CatSign::Plus), 0.0, ideal.gate_time, eo, probes);
      result.rows[idx] = {N, kind_name, d, 0.0, 0.0, r.records.at("target").back()};
      hyg[idx].absorb(r);
    } catch (const NumericalError& e) {
      rethrow_with_row(e, fmt::format("sweep_{} N={} delta={}", kind_name, N, d));
    }
  });
  for (const auto& h : hyg) result.hygiene.absorb(h);
  sort_rows(result.rows);
  return result;
}

SweepResult sweep_decoherence(const SystemParams& params, const std::vector<double>& kappa_grid_MHz,
                              const std::vector<double>& gamma_grid_MHz, const std::vector<int>& N_list,
                              DecoherenceMode mode, RateConvention convention, const RunOptions& options) {
  std::vector<std::pair<double, double>> points;
  switch (mode) {
    case DecoherenceMode::KappaOnly:
      for (double k : kappa_grid_MHz) points.emplace_back(k, 0.0);
      break;
    case DecoherenceMode::GammaOnly:
      for (double g : gamma_grid_MHz) points.emplace_back(0.0, g);
      break;
    case DecoherenceMode::Equal:
      for (double k : kappa_grid_MHz) points.emplace_back(k, k);
      break;
  }
  if (points.empty() || N_list.empty()) throw InvalidArgumentError("sweep_decoherence: empty grid or N list");
  for (const auto& [k, g] : points) {
    if (!(k >= 0.0) || !(g >= 0.0)) throw InvalidArgumentError("sweep_decoherence: rates must be non-negative");
  }

  SweepResult result;
  result.params_fingerprint = params.fingerprint();
  const std::string kind = to_string(mode);
  const std::size_t total = N_list.size() * points.size();
  result.rows.resize(total);
  std::vector<Hygiene> hyg(total);
  parallel_for(total, options.workers, [&](std::size_t idx) {
    const int N = N_list[idx / points.size()];
    const auto [k_mhz, g_mhz] = points[idx % points.size()];
    SystemParams p = params.with_tones(N);
    p.noise.kappa = p.noise.kappa0 = rate_from_mhz(k_mhz, convention);
    p.noise.gamma = p.noise.gamma0 = rate_from_mhz(g_mhz, convention);
    const FullModel model(p);
    const TimeDependentOperator H = full_hamiltonian(p, model);
    const NoiseSpec noise = NoiseSpec::for_model(model, p.noise);
    EvolveOptions eo;
    eo.tol = options.tol;
    eo.samples = 3;  // midpoint feeds the positivity check
    const Ket target = full_target(model, CatSign::Plus, CatSign::Plus);
    const Probes probes{{{"target", target}}, {}};
    try {
      const EvolutionResult r = evolve_master(
          H, noise, DensityOperator::pure(model.cat_product(CatSign::Plus, CatSign::Plus)), 0.0, p.gate_time, eo,
          probes);
      result.rows[idx] = {N, kind, 0.0, k_mhz, g_mhz, r.records.at("target").back()};
      hyg[idx].absorb(r);
    } catch (const NumericalError& e) {
      rethrow_with_row(e, fmt::format("sweep_{} N={} kappa_MHz={} gamma_MHz={}", kind, N, k_mhz, g_mhz));
    }
  });
  for (const auto& h : hyg) result.hygiene.absorb(h);
  sort_rows(result.rows);
  return result;
}

NoiseComparison effective_noise_compare(const SystemParams& params, double kappa, std::size_t samples, double tol) {
  if (!(kappa >= 0.0)) throw InvalidArgumentError("effective_noise_compare: kappa must be non-negative");
  EvolveOptions eo;
  eo.tol = tol;
  eo.samples = samples;
  NoiseComparison out;

  SystemParams p = params;
  p.noise = NoiseRates{kappa, 0.0, 0.0, 0.0};
  const FullModel model(p);
  const EvolutionResult full = evolve_master(
      full_hamiltonian(p, model), NoiseSpec::for_model(model, p.noise),
      DensityOperator::pure(model.cat_product(CatSign::Plus, CatSign::Plus)), 0.0, p.gate_time, eo,
      Probes{{{"target", full_target(model, CatSign::Plus, CatSign::Plus)}}, {}});

  const int cav = p.cutoffs.cavity;
  const TimeDependentOperator h_eff = effective_ms_hamiltonian(p, EffectiveForm::Ladder);
  NoiseSpec cat_noise;
  if (kappa > 0.0) {
    const Operator jump = effective_loss_jump(p.alpha);
    cat_noise.add("kappa_q1", embed(jump, "q1", h_eff.space()), kappa);
    cat_noise.add("kappa_q2", embed(jump, "q2", h_eff.space()), kappa);
  }
  const EvolutionResult eff =
      evolve_master(h_eff, cat_noise, DensityOperator::pure(effective_input(cav, CatSign::Plus, CatSign::Plus)), 0.0,
                    p.gate_time, eo, Probes{{{"target", effective_target(cav, CatSign::Plus, CatSign::Plus)}}, {}});

  out.times = full.times;
  out.full = full.records.at("target");
  out.effective = eff.records.at("target");
  for (std::size_t i = 0; i < out.times.size(); ++i) {
    out.max_deviation = std::max(out.max_deviation, std::abs(out.full[i] - out.effective[i]));
  }
  out.hygiene.absorb(full);
  out.hygiene.absorb(eff);
  return out;
}

std::vector<TrajectoryRow> trajectory_dataset(const SystemParams& params, const std::vector<int>& N_list,
                                              const std::vector<double>& timing_errors, std::size_t points) {
  if (points < 2) throw InvalidArgumentError("trajectory_dataset: need at least 2 points per curve");
  std::vector<TrajectoryRow> rows;
  rows.reserve(N_list.size() * timing_errors.size() * points);
  for (int N : N_list) {
    const SystemParams p = params.with_tones(N);
    const double tau = kTwoPi / p.zeta;
    for (double d : timing_errors) {
      if (!(d > -1.0)) throw InvalidArgumentError("trajectory_dataset: timing error must exceed -1");
      for (std::size_t k = 0; k < points; ++k) {
        const double x = (1.0 + d) * static_cast<double>(k) / static_cast<double>(points - 1);
        const TrajectoryPoint pt = trajectory_fg(p, x * tau);
        rows.push_back({N, d, x, pt.F, pt.G, std::hypot(pt.F, pt.G)});
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------

void write_truth_table_csv(std::ostream& out, const std::vector<TruthRow>& rows) {
  out << "input_label,model,fidelity\n";
  for (const auto& r : rows) out << fmt::format("{},{},{}\n", r.input_label, to_string(r.model), r.fidelity);
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "N,kind,delta,fidelity\n";
  for (const auto& r : result.rows) out << fmt::format("{},{},{},{}\n", r.N, r.kind, r.delta, r.fidelity);
}

void write_decoherence_csv(std::ostream& out, const SweepResult& result) {
  out << "N,kappa_MHz,gamma_MHz,fidelity\n";
  for (const auto& r : result.rows) out << fmt::format("{},{},{},{}\n", r.N, r.kappa_MHz, r.gamma_MHz, r.fidelity);
}

void write_populations_csv(std::ostream& out, const std::vector<std::pair<int, EvolutionResult>>& traces,
                           const std::vector<std::string>& labels) {
  out << "N,t_ns,label,population\n";
  for (const auto& [N, r] : traces) {
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      for (const auto& label : labels) {
        out << fmt::format("{},{},{},{}\n", N, r.times[i] * 1e9, label, r.records.at(label)[i]);
      }
    }
  }
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows) {
  out << "N,delta_t,t_over_tau,F,G,closure_error\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{}\n", r.N, r.delta_t, r.t_over_tau, r.F, r.G, r.closure_error);
  }
}

// ---------------------------------------------------------------------------

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& task) {
  const std::size_t w = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(workers, 1)));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first) first = std::current_exception();
        next.store(n);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t k = 0; k < w; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

int default_workers() {
  if (const char* env = std::getenv("KATSIM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 1024L));
    spdlog::warn("ignoring KATSIM_THREADS='{}' (expected a positive integer)", env);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace katsim
