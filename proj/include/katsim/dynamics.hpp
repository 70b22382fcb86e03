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

#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "katsim/fock.hpp"
#include "katsim/hamiltonians.hpp"

namespace katsim {

struct IntegratorStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
  double tolerance = 0.0;
};

struct EvolveOptions {
  /// Relative and absolute tolerance of the Dormand-Prince 5(4) controller.
  double tol = 1e-9;
  /// Explicit sample times (ascending, inside [t0, t1]). When empty, `samples`
  /// uniform points from t0 to t1 inclusive are used.
  std::vector<double> sample_times;
  std::size_t samples = 400;
  /// Keep the state at every sample time in EvolutionResult::kets / densities.
  bool keep_states = false;
  /// Upper bound on the step size; 0 means unbounded.
  double max_step = 0.0;
};

/// Named quantities recorded at each sample time.
struct Probes {
  /// |<phi|psi>|^2, or <phi|rho|phi> for density operators.
  std::vector<std::pair<std::string, Ket>> overlaps;
  /// Re <O>.
  std::vector<std::pair<std::string, Operator>> expectations;
};

struct EvolutionResult {
  std::vector<double> times;
  std::map<std::string, std::vector<double>> records;
  std::variant<std::monostate, Ket, DensityOperator> final_state;
  std::vector<Ket> kets;
  std::vector<DensityOperator> densities;
  IntegratorStats stats;

  /// Largest |norm - 1| (kets) or |trace - 1| (density operators) over the samples.
  double max_norm_drift = 0.0;
  /// Largest Hermiticity deviation over the samples (density operators only).
  double max_hermiticity_deviation = 0.0;
  /// Smallest eigenvalue of rho at the midpoint and final sample (density operators only).
  double min_eigenvalue = 0.0;

  const Ket& final_ket() const { return std::get<Ket>(final_state); }
  const DensityOperator& final_density() const { return std::get<DensityOperator>(final_state); }

  /// `time` column followed by one column per record, in name order.
  void write_csv(std::ostream& out) const;
};

/// Lindblad channels sum_j D[L_j] rho with D[o] rho = o rho o^+ - {o^+ o, rho}/2.
class NoiseSpec {
 public:
  struct Channel {
    std::string label;
    Operator op;
    double rate;
  };

  void add(std::string label, Operator op, double rate);
  const std::vector<Channel>& channels() const { return channels_; }
  bool empty() const { return channels_.empty(); }

  /// (a_k, kappa), (n_k, gamma) for both KPOs and (a0, kappa0), (n0, gamma0)
  /// for the cavity, dropping channels with zero rate.
  static NoiseSpec for_model(const FullModel& model, const NoiseRates& rates);

 private:
  std::vector<Channel> channels_;
};

/// i d|psi>/dt = H(t)|psi> from t0 to t1.
EvolutionResult evolve_state(const TimeDependentOperator& H, const Ket& psi0, double t0, double t1,
                             const EvolveOptions& options = {}, const Probes& probes = {});

/// d rho/dt = -i[H(t), rho] + sum_j gamma_j D[L_j] rho from t0 to t1.
/// Uses sparse matrix action on the dense rho only; the superoperator is never built.
EvolutionResult evolve_master(const TimeDependentOperator& H, const NoiseSpec& noise, const DensityOperator& rho0,
                              double t0, double t1, const EvolveOptions& options = {}, const Probes& probes = {});

/// Full propagator U(t1, t0) by integrating i dU/dt = H U (small spaces only).
DenseMatrix evolve_propagator(const TimeDependentOperator& H, double t0, double t1, double tol = 1e-10);

struct MagnusCoefficients {
  cplx chi;
  double beta;
};

/// Single-tone coefficients
///   chi(t)  = (2 i J alpha / Delta)(1 - e^{i Delta t})
///   beta(t) = (2 J alpha / Delta)^2 (sin(Delta t) - Delta t).
MagnusCoefficients magnus_coefficients(const SystemParams& params, double t);

enum class MagnusModel { SingleTone, Composite };

/// Closed-form propagator of the effective cat-subspace Hamiltonian on
/// effective_space(params.cutoffs.cavity).
///   SingleTone: exp{-i[(chi a0^+ + chi^* a0) Sx + beta Sx^2]}
///   Composite:  e^{-i F Sx x} e^{-i G Sx p} e^{-i A Sx^2}
/// For the composite form the physical quadrature integrals are used:
/// F as in `trajectory`, G and A with the opposite sign to `trajectory`
/// (see the note there on the printed g(t)).
Operator magnus_propagator(const SystemParams& params, double t, MagnusModel model);

/// exp(i pi Sx^2 / 2) on two cat qubits (4x4, index = 2 q1 + q2, 0 = C+).
Operator ms_gate_ideal();

}  // namespace katsim
