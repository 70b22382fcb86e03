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

#include "katsim/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <fmt/format.h>

#include "katsim/pulses.hpp"

namespace katsim {

namespace {

constexpr double kHbar = 1.054571817e-34;
constexpr double kElementaryCharge = 1.602176634e-19;

bool close_rel(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)); }

}  // namespace

// ---------------------------------------------------------------------------
// SystemParams

SystemParams SystemParams::paper_defaults(int N) {
  SystemParams p;
  p.alpha = 2.0;
  p.K = mhz(20.0);
  p.Omega_p = p.K * p.alpha * p.alpha;
  p.J = mhz(1.0);
  p.Delta = 4.0 * p.J * p.alpha;
  p.Delta_drive = p.Delta;
  p.zeta = p.Delta;
  p.gate_time = kTwoPi / p.zeta;
  p.cutoffs = Cutoffs{default_kpo_cutoff(p.alpha), 8, 0};
  return p.with_tones(N);
}

SystemParams SystemParams::with_tones(int n) const {
  SystemParams p = *this;
  p.N = n;
  p.weights = shapira_weights(n);
  return p;
}

std::vector<std::string> SystemParams::invariant_violations() const {
  std::vector<std::string> out;
  if (!(K > 0.0)) out.push_back("K: must be positive");
  if (!(J > 0.0)) out.push_back("J: must be positive");
  if (!(Delta != 0.0)) out.push_back("Delta: must be non-zero");
  if (!(zeta > 0.0)) out.push_back("zeta: must be positive");
  if (!(alpha > 0.0)) out.push_back("alpha: must be positive");
  if (!close_rel(alpha * alpha * K, Omega_p, 1e-9)) {
    out.push_back(fmt::format("Omega_p: alpha^2 K = {:.9e} rad/s but Omega_p = {:.9e} rad/s", alpha * alpha * K,
                              Omega_p));
  }
  if (!close_rel(gate_time * zeta, kTwoPi, 1e-12)) {
    out.push_back(fmt::format("gate_time: zeta * gate_time = {:.15g}, expected 2 pi", gate_time * zeta));
  }
  if (N < 1) out.push_back("N: must be at least 1");
  if (weights.size() != static_cast<std::size_t>(std::max(N, 0))) {
    out.push_back(fmt::format("weights: {} entries for N = {}", weights.size(), N));
  }
  if (noise.kappa < 0 || noise.gamma < 0 || noise.kappa0 < 0 || noise.gamma0 < 0) {
    out.push_back("noise: rates must be non-negative");
  }
  if (cutoffs.kpo < 2) out.push_back("cutoffs.kpo: must be at least 2");
  if (cutoffs.cavity < 2) out.push_back("cutoffs.cavity: must be at least 2");
  if (cutoffs.kerr_levels < 0 || cutoffs.kerr_levels > cutoffs.kpo) {
    out.push_back("cutoffs.kerr_levels: must lie in [0, cutoffs.kpo]");
  }
  if (cutoffs.kerr_levels == 1) out.push_back("cutoffs.kerr_levels: must keep at least the two cat states");
  return out;
}

std::string SystemParams::fingerprint() const {
  std::string s = fmt::format("{:.17g}|{:.17g}|{:.17g}|{:.17g}|{:.17g}|{:.17g}|{:.17g}|{}|{:.17g}", alpha, K, Omega_p,
                              J, Delta, Delta_drive, zeta, N, gate_time);
  for (double w : weights) s += fmt::format("|{:.17g}", w);
  s += fmt::format("|{:.17g}|{:.17g}|{:.17g}|{:.17g}|{}|{}|{}", noise.kappa, noise.gamma, noise.kappa0, noise.gamma0,
                   cutoffs.kpo, cutoffs.cavity, cutoffs.kerr_levels);
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return fmt::format("{:016x}", h);
}

// ---------------------------------------------------------------------------
// TimeDependentOperator

TimeDependentOperator::TimeDependentOperator(HilbertSpace space, std::vector<TimeTerm> terms, bool hermitian_closure)
    : space_(std::move(space)), terms_(std::move(terms)), hermitian_closure_(hermitian_closure) {
  for (const auto& term : terms_) {
    if (!(term.op.space() == space_)) throw SpaceMismatchError("TimeDependentOperator: term on a different space");
  }
}

cplx TimeDependentOperator::coefficient(std::size_t term, double t) const {
  const auto& c = terms_.at(term).coeff;
  return c ? c(t) : cplx(1.0);
}

Operator TimeDependentOperator::at(double t) const {
  Operator sum = Operator::zero(space_);
  for (std::size_t j = 0; j < terms_.size(); ++j) sum = sum + terms_[j].op * coefficient(j, t);
  return sum;
}

void TimeDependentOperator::apply(double t, const Vector& x, Vector& y) const {
  y.setZero(x.size());
  for (std::size_t j = 0; j < terms_.size(); ++j) terms_[j].op.apply_add(coefficient(j, t), x, y);
}

// ---------------------------------------------------------------------------
// Full model

Operator single_kerr_hamiltonian(double K, double Omega_p, int cutoff) {
  const Operator a = annihilation(cutoff, Storage::Dense);
  const Operator ad = a.adjoint();
  const Operator a2 = a * a;
  const Operator ad2 = ad * ad;
  return ad2 * a2 * cplx(-K) + a2 * cplx(Omega_p) + ad2 * cplx(Omega_p);
}

namespace {

HilbertSpace model_space(const SystemParams& p) {
  const int kdim = p.cutoffs.kerr_levels > 0 ? p.cutoffs.kerr_levels : p.cutoffs.kpo;
  return HilbertSpace({{"k1", kdim}, {"k2", kdim}, {"cavity", p.cutoffs.cavity}});
}

}  // namespace

FullModel::FullModel(const SystemParams& params) : params_(params), space_(model_space(params)) {
  if (params.cutoffs.kpo < 2 || params.cutoffs.cavity < 2) {
    throw InvalidDimensionError("FullModel: cutoffs must be at least 2");
  }
  if (params.cutoffs.kerr_levels == 1 || params.cutoffs.kerr_levels > params.cutoffs.kpo) {
    throw InvalidArgumentError("FullModel: kerr_levels must be 0 or in [2, kpo]");
  }
  const int fock = params.cutoffs.kpo;
  const double e_cat = params.Omega_p * params.Omega_p / params.K;

  const Operator a_fock = annihilation(fock, Storage::Dense);
  const Operator n_fock = katsim::number(fock, Storage::Dense);
  const Operator h_fock = single_kerr_hamiltonian(params.K, params.Omega_p, fock) -
                          Operator::identity(a_fock.space(), Storage::Dense) * cplx(e_cat);
  const Ket c_plus = cat_state(params.alpha, CatSign::Plus, fock);
  const Ket c_minus = cat_state(params.alpha, CatSign::Minus, fock);

  Operator a_kpo = a_fock;
  Operator n_kpo = n_fock;
  Operator h_kpo = h_fock;
  Ket kp = c_plus;
  Ket km = c_minus;

  if (reduced()) {
    const int m = params.cutoffs.kerr_levels;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(h_fock.to_dense());
    // Cat manifold sits at shifted energy 0; keep the m levels closest to it.
    std::vector<int> order(static_cast<std::size_t>(fock));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return std::abs(eig.eigenvalues()(i)) < std::abs(eig.eigenvalues()(j)); });
    order.resize(static_cast<std::size_t>(m));
    std::sort(order.begin(), order.end(), [&](int i, int j) { return eig.eigenvalues()(i) > eig.eigenvalues()(j); });

    DenseMatrix v(fock, m);
    for (int c = 0; c < m; ++c) {
      v.col(c) = eig.eigenvectors().col(order[static_cast<std::size_t>(c)]);
      kerr_energies_.push_back(eig.eigenvalues()(order[static_cast<std::size_t>(c)]));
    }
    const HilbertSpace rs = HilbertSpace::single(m);
    a_kpo = Operator(rs, DenseMatrix(v.adjoint() * a_fock.dense() * v), Storage::Dense);
    n_kpo = Operator(rs, DenseMatrix(v.adjoint() * n_fock.dense() * v), Storage::Dense);
    DenseMatrix h = DenseMatrix::Zero(m, m);
    for (int c = 0; c < m; ++c) h(c, c) = kerr_energies_[static_cast<std::size_t>(c)];
    h_kpo = Operator(rs, std::move(h), Storage::Dense);

    auto project = [&](const Ket& k) {
      Vector r = v.adjoint() * k.amplitudes();
      const double kept = r.squaredNorm();
      if (1.0 - kept > kTruncationTolerance) {
        throw TruncationLossError(
            fmt::format("cat state keeps only {:.9f} of its weight in {} Kerr levels", kept, m), 1.0 - kept);
      }
      return Ket(rs, r / std::sqrt(kept));
    };
    kp = project(c_plus);
    km = project(c_minus);
  }

  kpo_dim_ = static_cast<int>(a_kpo.dim());
  const Operator a0 = annihilation(params.cutoffs.cavity);
  const Operator n0 = katsim::number(params.cutoffs.cavity);
  lowering_.push_back(embed(a0, "cavity", space_));
  lowering_.push_back(embed(a_kpo, "k1", space_));
  lowering_.push_back(embed(a_kpo, "k2", space_));
  number_.push_back(embed(n0, "cavity", space_));
  number_.push_back(embed(n_kpo, "k1", space_));
  number_.push_back(embed(n_kpo, "k2", space_));
  kerr_.push_back(embed(h_kpo, "k1", space_));
  kerr_.push_back(embed(h_kpo, "k2", space_));
  cats_.push_back(std::move(kp));
  cats_.push_back(std::move(km));
}

Ket FullModel::cat_product(CatSign s1, CatSign s2) const {
  const Ket vac = fock_state(0, params_.cutoffs.cavity);
  const std::vector<Ket> parts{
      Ket(HilbertSpace::single(kpo_dim_), kpo_cat(s1).amplitudes()),
      Ket(HilbertSpace::single(kpo_dim_), kpo_cat(s2).amplitudes()),
      vac,
  };
  return product_state(space_, parts);
}

Operator kerr_hamiltonian(const SystemParams& params, int which_kpo) {
  if (which_kpo != 1 && which_kpo != 2) throw InvalidArgumentError("kerr_hamiltonian: which_kpo must be 1 or 2");
  // Always the Fock representation, whatever kerr_levels says.
  SystemParams fock = params;
  fock.cutoffs.kerr_levels = 0;
  const HilbertSpace space = model_space(fock);
  const Operator h = single_kerr_hamiltonian(params.K, params.Omega_p, params.cutoffs.kpo);
  return embed(h, which_kpo == 1 ? "k1" : "k2", space);
}

cplx bus_coupling(const SystemParams& params, double t) {
  cplx sum = 0.0;
  for (std::size_t n = 0; n < params.weights.size(); ++n) {
    sum += params.weights[n] * std::polar(1.0, static_cast<double>(n + 1) * params.zeta * t);
  }
  return params.J * std::polar(1.0, (params.Delta - params.Delta_drive) * t) * sum;
}

TimeDependentOperator full_hamiltonian(const SystemParams& params) { return full_hamiltonian(params, FullModel(params)); }

TimeDependentOperator full_hamiltonian(const SystemParams& params, const FullModel& model) {
  if (params.weights.empty()) throw InvalidArgumentError("full_hamiltonian: empty weights");
  const Operator& a0 = model.lowering(0);
  const Operator coupling = (model.lowering(1) + model.lowering(2)) * a0.adjoint();
  std::vector<TimeTerm> terms;
  terms.push_back({model.kerr(1) + model.kerr(2), {}});
  terms.push_back({coupling, [params](double t) { return bus_coupling(params, t); }});
  terms.push_back({coupling.adjoint(), [params](double t) { return std::conj(bus_coupling(params, t)); }});
  return TimeDependentOperator(model.space(), std::move(terms), true);
}

// ---------------------------------------------------------------------------
// Effective cat-subspace model

HilbertSpace effective_space(int cavity_cutoff) {
  return HilbertSpace({{"q1", 2}, {"q2", 2}, {"cavity", cavity_cutoff}});
}

Operator effective_sx(const HilbertSpace& space) {
  const Operator sx = qubit_paulis().sx;
  return (embed(sx, "q1", space) + embed(sx, "q2", space)) * cplx(0.5);
}

double quadrature_f(const SystemParams& params, double t) {
  return std::sqrt(2.0) * 2.0 * params.alpha * bus_coupling(params, t).real();
}

double quadrature_g(const SystemParams& params, double t) {
  return std::sqrt(2.0) * 2.0 * params.alpha * bus_coupling(params, t).imag();
}

TimeDependentOperator effective_ms_hamiltonian(const SystemParams& params, EffectiveForm form) {
  if (params.weights.empty()) throw InvalidArgumentError("effective_ms_hamiltonian: empty weights");
  const HilbertSpace space = effective_space(params.cutoffs.cavity);
  const Operator sx = effective_sx(space);
  const Operator a0 = embed(annihilation(params.cutoffs.cavity), "cavity", space);
  std::vector<TimeTerm> terms;
  if (form == EffectiveForm::Ladder) {
    // h(t) = 2 alpha * bus_coupling multiplies S_x a0^dagger.
    const Operator up = sx * a0.adjoint();
    terms.push_back({up, [params](double t) { return 2.0 * params.alpha * bus_coupling(params, t); }});
    terms.push_back({up.adjoint(), [params](double t) { return std::conj(2.0 * params.alpha * bus_coupling(params, t)); }});
  } else {
    const cplx i(0.0, 1.0);
    const Operator x = (a0 + a0.adjoint()) * cplx(1.0 / std::sqrt(2.0));
    const Operator p = (a0.adjoint() - a0) * (i / std::sqrt(2.0));
    terms.push_back({sx * x, [params](double t) { return cplx(quadrature_f(params, t)); }});
    terms.push_back({sx * p, [params](double t) { return cplx(quadrature_g(params, t)); }});
  }
  return TimeDependentOperator(space, std::move(terms), true);
}

// ---------------------------------------------------------------------------
// Circuit mapping and drive map

CircuitModel derive_circuit(const CircuitParams& c) {
  for (double v : {c.E_C, c.E_J, c.K0, c.C_g, c.C_s, c.C_r, c.L_r}) {
    if (!(v > 0.0)) throw InvalidArgumentError("circuit_to_model: circuit constants must be positive");
  }
  if (c.dE_J < 0.0) throw InvalidArgumentError("circuit_to_model: dE_J must be non-negative");
  CircuitModel m{};
  m.omega_0 = 1.0 / std::sqrt(c.L_r * c.C_r);
  m.omega_k = 8.0 * std::sqrt(c.E_C * c.E_J / c.K0);
  m.K = 2.0 * c.E_C / (c.K0 * c.K0);
  m.Omega_p = c.dE_J * m.omega_k / (8.0 * c.E_J);
  // Energies are carried as angular frequencies, so hbar enters only through
  // the zero-point voltage and the final energy-to-rate conversion.
  m.V_o = std::sqrt(kHbar * m.omega_0 / (2.0 * c.C_r));
  m.n0 = std::pow(c.E_J / (32.0 * c.K0 * c.E_C), 0.25);
  m.J = 2.0 * c.C_g * kElementaryCharge * m.V_o * m.n0 / ((c.C_g + c.C_s) * kHbar);
  m.Delta = m.omega_0 - m.omega_k;
  return m;
}

SystemParams circuit_to_model(const CircuitParams& circuit) {
  const CircuitModel m = derive_circuit(circuit);
  SystemParams p = SystemParams::paper_defaults(1);
  p.K = m.K;
  p.Omega_p = m.Omega_p;
  p.J = m.J;
  p.Delta = m.Delta;
  p.Delta_drive = m.Delta;
  p.alpha = std::sqrt(m.Omega_p / m.K);
  p.zeta = std::abs(m.Delta);
  p.gate_time = kTwoPi / p.zeta;
  return p;
}

std::vector<double> drive_map(const std::vector<double>& tone_amplitudes, const std::vector<double>& tone_detunings,
                              double Delta, double J) {
  (void)J;  // the literal weight definition does not involve J
  if (tone_amplitudes.size() != tone_detunings.size()) throw InvalidArgumentError("drive_map: length mismatch");
  if (Delta == 0.0) throw InvalidArgumentError("drive_map: Delta must be non-zero");
  std::vector<double> r;
  r.reserve(tone_amplitudes.size());
  for (std::size_t n = 0; n < tone_amplitudes.size(); ++n) {
    const double d = tone_detunings[n];
    if (d == 0.0) throw InvalidArgumentError(fmt::format("drive_map: tone {} has zero detuning", n + 1));
    if (d == -Delta) throw InvalidArgumentError(fmt::format("drive_map: tone {} is resonant (delta_n = -Delta)", n + 1));
    r.push_back(4.0 * tone_amplitudes[n] * (1.0 / Delta + 1.0 / d));
  }
  return r;
}

std::vector<double> drive_map_inverse(const std::vector<double>& weights, const std::vector<double>& tone_detunings,
                                      double Delta, double J) {
  (void)J;
  if (weights.size() != tone_detunings.size()) throw InvalidArgumentError("drive_map_inverse: length mismatch");
  if (Delta == 0.0) throw InvalidArgumentError("drive_map_inverse: Delta must be non-zero");
  std::vector<double> omega;
  omega.reserve(weights.size());
  for (std::size_t n = 0; n < weights.size(); ++n) {
    const double d = tone_detunings[n];
    if (d == 0.0 || d == -Delta) {
      throw InvalidArgumentError(fmt::format("drive_map_inverse: tone {} has a singular detuning", n + 1));
    }
    omega.push_back(weights[n] / (4.0 * (1.0 / Delta + 1.0 / d)));
  }
  return omega;
}

}  // namespace katsim
