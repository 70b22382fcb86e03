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

#include <array>
#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "katsim/dynamics.hpp"
#include "katsim/hamiltonians.hpp"

namespace katsim {

double fidelity(const Ket& target, const Ket& state);
double fidelity(const Ket& target, const DensityOperator& state);

/// The four computational inputs |C_s1 C_s2>, in table order ++, +-, -+, --.
inline constexpr std::array<std::pair<CatSign, CatSign>, 4> kGateInputs{{
    {CatSign::Plus, CatSign::Plus},
    {CatSign::Plus, CatSign::Minus},
    {CatSign::Minus, CatSign::Plus},
    {CatSign::Minus, CatSign::Minus},
}};

/// "C+C+", "C+C-", ...
std::string input_label(CatSign s1, CatSign s2);

/// Gate output (|s1 s2> + i |~s1 ~s2>)/sqrt2 on the model space, cavity in vacuum.
/// This is exp(i pi Sx^2 / 2)|s1 s2> up to the global phase e^{i pi/4}.
Ket full_target(const FullModel& model, CatSign s1, CatSign s2);
Ket effective_target(int cavity_cutoff, CatSign s1, CatSign s2);
/// Same on the bare two-qubit space (q1, q2).
Ket qubit_target(CatSign s1, CatSign s2);

enum class GateModel { Full, Effective, Ideal };
std::string to_string(GateModel model);

/// Accumulated numerical-hygiene figures of a batch of runs.
struct Hygiene {
  std::size_t runs = 0;
  std::size_t density_runs = 0;
  std::size_t steps = 0;
  std::size_t rejected = 0;
  double max_norm_drift = 0.0;             // |norm - 1| or |trace - 1|
  double max_hermiticity_deviation = 0.0;  // density operators
  double min_eigenvalue = 1.0;             // density operators
  double tolerance = 0.0;

  void absorb(const EvolutionResult& r);
  void absorb(const Hygiene& other);
};

struct TruthRow {
  std::string input_label;
  GateModel model;
  double fidelity;
};

struct TruthTable {
  std::vector<TruthRow> rows;
  Hygiene hygiene;
};

struct RunOptions {
  double tol = 1e-9;
  int workers = 1;
};

/// Evolves each of the four inputs to params.gate_time and scores it against
/// its gate output. Full: the two-KPO + bus model with Fock-space cat targets.
/// Effective: closed-form Magnus propagator (single tone for N = 1, composite
/// otherwise). Ideal: exp(i pi Sx^2/2) on two qubits.
TruthTable run_truth_table(const SystemParams& params, GateModel model, const RunOptions& options = {});

/// Full-model evolution from |C+C+0> over [0, window * gate_time], recording
/// the populations of |C+C+0> and |C-C-0> ("C+C+0", "C-C-0").
EvolutionResult population_trace(const SystemParams& params, double window = 2.5, std::size_t samples = 400,
                                 double tol = 1e-9);

/// Same with caller-supplied labelled probe states on the full-model space.
EvolutionResult population_trace(const SystemParams& params, const Ket& initial,
                                 const std::vector<std::pair<std::string, Ket>>& labels, double window,
                                 std::size_t samples, double tol);

/// Length of the contiguous time interval around `t_center` on which both
/// traces stay inside [lo, hi]. Crossings are located by linear interpolation
/// between samples. Zero when either trace is outside the band at t_center.
double dwell_window(const std::vector<double>& times, const std::vector<double>& p1, const std::vector<double>& p2,
                    double lo, double hi, double t_center);

enum class ErrorKind { Timing, Detuning, Coupling };
std::string to_string(ErrorKind kind);

/// x' = (1 + delta) x. Timing changes only the final time, detuning changes
/// Delta (zeta and the drive reference stay put), coupling changes J.
SystemParams apply_error(const SystemParams& params, ErrorKind kind, double delta);

enum class DecoherenceMode { KappaOnly, GammaOnly, Equal };
std::string to_string(DecoherenceMode mode);

/// How a rate written in MHz becomes a decay rate in 1/s.
///   Angular: rate = value * 1e6          (the MHz figure is already angular)
///   Cyclic:  rate = 2 pi * value * 1e6   (the MHz figure is rate / 2 pi)
enum class RateConvention { Angular, Cyclic };
std::string to_string(RateConvention c);
double rate_from_mhz(double value_mhz, RateConvention c);

struct SweepRow {
  int N = 1;
  std::string kind;  // timing, detuning, coupling, kappa_only, gamma_only, equal
  double delta = 0.0;
  double kappa_MHz = 0.0;
  double gamma_MHz = 0.0;
  double fidelity = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by (N, delta, kappa, gamma)
  std::string params_fingerprint;
  Hygiene hygiene;
};

/// Full-model fidelity of |C+C+0> against its gate output for every (N, delta).
SweepResult sweep_error(const SystemParams& params, ErrorKind kind, const std::vector<double>& grid,
                        const std::vector<int>& N_list, const RunOptions& options = {});

/// Master-equation fidelity at gate_time for each rate point, with kappa0 =
/// kappa and gamma0 = gamma. KappaOnly walks kappa_grid, GammaOnly gamma_grid,
/// Equal walks kappa_grid with gamma = kappa.
SweepResult sweep_decoherence(const SystemParams& params, const std::vector<double>& kappa_grid_MHz,
                              const std::vector<double>& gamma_grid_MHz, const std::vector<int>& N_list,
                              DecoherenceMode mode, RateConvention convention, const RunOptions& options = {});

struct NoiseComparison {
  std::vector<double> times;
  std::vector<double> full;       // fidelity trace, full model with D[a_k]
  std::vector<double> effective;  // fidelity trace, cat-level model with the reduced jump
  double max_deviation = 0.0;
  Hygiene hygiene;
};

/// Fidelity traces of |C+C+0> against its gate output over [0, gate_time] for
/// the full model (loss kappa on each KPO only) and for the cat-level model
/// whose KPO loss is effective_loss_jump at the same rate.
NoiseComparison effective_noise_compare(const SystemParams& params, double kappa, std::size_t samples = 101,
                                        double tol = 1e-9);

struct TrajectoryRow {
  int N = 1;
  double delta_t = 0.0;
  double t_over_tau = 0.0;
  double F = 0.0;
  double G = 0.0;
  double closure_error = 0.0;
};

/// (F, G) over t in [0, (1 + delta_t) tau] with `points` samples per curve.
std::vector<TrajectoryRow> trajectory_dataset(const SystemParams& params, const std::vector<int>& N_list,
                                              const std::vector<double>& timing_errors, std::size_t points = 512);

void write_truth_table_csv(std::ostream& out, const std::vector<TruthRow>& rows);
void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_decoherence_csv(std::ostream& out, const SweepResult& result);
/// Long format: one row per (N, sample, label).
void write_populations_csv(std::ostream& out, const std::vector<std::pair<int, EvolutionResult>>& traces,
                           const std::vector<std::string>& labels);
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows);

/// Runs task(i) for i in [0, n) on up to `workers` threads. The first
/// exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& task);

/// Worker count from KATSIM_THREADS, falling back to the hardware concurrency.
int default_workers();

}  // namespace katsim
