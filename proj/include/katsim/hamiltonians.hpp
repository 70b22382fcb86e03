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
#include <numbers>
#include <string>
#include <vector>

#include "katsim/cat_space.hpp"
#include "katsim/fock.hpp"

namespace katsim {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
/// Angular frequency of an ordinary frequency given in MHz.
inline constexpr double mhz(double f) { return kTwoPi * 1e6 * f; }

struct NoiseRates {
  double kappa = 0.0;   // KPO single-photon loss
  double gamma = 0.0;   // KPO pure dephasing
  double kappa0 = 0.0;  // cavity loss
  double gamma0 = 0.0;  // cavity dephasing
};

struct Cutoffs {
  int kpo = 18;
  int cavity = 8;
  /// 0: each KPO in the Fock basis truncated at `kpo`.
  /// >0: each KPO restricted to its `kerr_levels` eigenstates of H_Kerr closest
  /// to the cat manifold, diagonalized at Fock cutoff `kpo`.
  int kerr_levels = 0;
};

/// Physical parameters, all rates in rad/s and times in s.
struct SystemParams {
  double alpha = 2.0;
  double K = mhz(20.0);
  double Omega_p = mhz(20.0) * 4.0;
  double J = mhz(1.0);
  double Delta = 4.0 * mhz(1.0) * 2.0;
  /// Detuning the composite drive J_N(t) was synthesized for. Equal to Delta
  /// unless a detuning error is being modelled.
  double Delta_drive = 4.0 * mhz(1.0) * 2.0;
  double zeta = 4.0 * mhz(1.0) * 2.0;
  int N = 1;
  std::vector<double> weights{1.0};
  double gate_time = kTwoPi / (4.0 * mhz(1.0) * 2.0);
  NoiseRates noise;
  Cutoffs cutoffs;

  /// alpha = 2, K/2pi = 20 MHz, J/2pi = 1 MHz, Omega_p = K alpha^2,
  /// Delta = zeta = 4 J alpha, T = 2pi/zeta, composite weights for N tones.
  static SystemParams paper_defaults(int N = 1);

  /// Same parameters with N tones and the matching normalized weights.
  SystemParams with_tones(int N) const;

  /// Human-readable list of broken invariants; empty when consistent.
  std::vector<std::string> invariant_violations() const;

  /// Stable 64-bit hash (hex) of every field at full precision.
  std::string fingerprint() const;
};

using Coefficient = std::function<cplx(double)>;

struct TimeTerm {
  Operator op;
  Coefficient coeff;  // empty means the constant 1
};

/// H(t) = sum_j c_j(t) O_j. With hermitian_closure every term's conjugate
/// partner is part of the list, so H(t) is Hermitian at every t.
class TimeDependentOperator {
 public:
  TimeDependentOperator(HilbertSpace space, std::vector<TimeTerm> terms, bool hermitian_closure);

  const HilbertSpace& space() const { return space_; }
  const std::vector<TimeTerm>& terms() const { return terms_; }
  bool hermitian_closure() const { return hermitian_closure_; }

  cplx coefficient(std::size_t term, double t) const;
  Operator at(double t) const;
  /// y = H(t) x
  void apply(double t, const Vector& x, Vector& y) const;

 private:
  HilbertSpace space_;
  std::vector<TimeTerm> terms_;
  bool hermitian_closure_;
};

/// Operators of the two-KPO + bus model on the space (k1, k2, cavity).
class FullModel {
 public:
  explicit FullModel(const SystemParams& params);

  const HilbertSpace& space() const { return space_; }
  bool reduced() const { return params_.cutoffs.kerr_levels > 0; }
  int kpo_dim() const { return kpo_dim_; }

  /// Mode 0 is the cavity, 1 and 2 the KPOs.
  const Operator& lowering(int mode) const { return lowering_.at(static_cast<std::size_t>(mode)); }
  const Operator& number(int mode) const { return number_.at(static_cast<std::size_t>(mode)); }
  /// H_Kerr of KPO 1 or 2 with the cat-manifold energy Omega_p^2/K removed.
  const Operator& kerr(int kpo) const { return kerr_.at(static_cast<std::size_t>(kpo - 1)); }

  /// Single-KPO cat ket in the KPO representation of this model.
  const Ket& kpo_cat(CatSign sign) const { return cats_[sign == CatSign::Plus ? 0 : 1]; }
  /// |C_s1>|C_s2>|0>
  Ket cat_product(CatSign s1, CatSign s2) const;

  /// Single-mode H_Kerr spectrum kept by the reduced representation (empty for Fock).
  const std::vector<double>& kerr_levels() const { return kerr_energies_; }

 private:
  SystemParams params_;
  HilbertSpace space_;
  int kpo_dim_ = 0;
  std::vector<Operator> lowering_;
  std::vector<Operator> number_;
  std::vector<Operator> kerr_;
  std::vector<Ket> cats_;  // C+, C-
  std::vector<double> kerr_energies_;
};

/// Single-mode -K a^2+ a^2 + Omega_p a^2 + Omega_p a^2+ in the Fock basis.
Operator single_kerr_hamiltonian(double K, double Omega_p, int cutoff);

/// H_Kerr on KPO `which_kpo` (1 or 2) of the full model space.
Operator kerr_hamiltonian(const SystemParams& params, int which_kpo);

/// Complex coefficient multiplying a_k a0^dagger in the full Hamiltonian:
/// J_N(t) e^{i Delta t} = J e^{i (Delta - Delta_drive) t} sum_n r_n e^{i n zeta t}.
cplx bus_coupling(const SystemParams& params, double t);

/// sum_k H_k^Kerr + sum_k [J_N(t) a_k a0^dagger e^{i Delta t} + h.c.], with the
/// constant 2 Omega_p^2/K (identity on the cat manifold) removed so the ground
/// manifold does not carry a fast global phase.
TimeDependentOperator full_hamiltonian(const SystemParams& params);
TimeDependentOperator full_hamiltonian(const SystemParams& params, const FullModel& model);

enum class EffectiveForm { Ladder, Quadrature };

/// Space (q1, q2, cavity) with two cat qubits (index 0 = C+) and the bus.
HilbertSpace effective_space(int cavity_cutoff);
Operator effective_sx(const HilbertSpace& space);

/// 2 J alpha S_x sum_n r_n (a0 e^{-i n zeta t} + a0^dagger e^{i n zeta t}),
/// the cat-subspace image of full_hamiltonian. Quadrature form writes the
/// same operator as f(t) S_x x + g(t) S_x p.
TimeDependentOperator effective_ms_hamiltonian(const SystemParams& params, EffectiveForm form);

/// f(t) and g(t) of the quadrature form.
double quadrature_f(const SystemParams& params, double t);
double quadrature_g(const SystemParams& params, double t);

struct CircuitParams {
  double E_C = 0.0;   // charging energy, rad/s (E/hbar)
  double E_J = 0.0;   // Josephson energy, rad/s
  double dE_J = 0.0;  // flux-modulation depth, rad/s
  double K0 = 1.0;    // number of SQUIDs in the array
  double C_g = 0.0;   // F
  double C_s = 0.0;   // F
  double C_r = 0.0;   // F
  double L_r = 0.0;   // H
};

struct CircuitModel {
  double K;
  double Omega_p;
  double J;
  double Delta;
  double omega_k;
  double omega_0;
  double V_o;
  double n0;
};

CircuitModel derive_circuit(const CircuitParams& circuit);

/// Replaces K, Omega_p, J, Delta (and the dependent alpha, zeta, gate_time)
/// of the paper defaults with the circuit-derived values.
SystemParams circuit_to_model(const CircuitParams& circuit);

/// r_n = 4 Omega_n (1/Delta + 1/delta_n). The result carries the units of
/// Omega_n; callers treat it as informational.
std::vector<double> drive_map(const std::vector<double>& tone_amplitudes, const std::vector<double>& tone_detunings,
                              double Delta, double J);
std::vector<double> drive_map_inverse(const std::vector<double>& weights, const std::vector<double>& tone_detunings,
                                      double Delta, double J);

}  // namespace katsim
