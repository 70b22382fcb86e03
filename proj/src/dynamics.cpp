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

#include "katsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "katsim/pulses.hpp"

namespace katsim {

namespace {

constexpr std::size_t kMaxSteps = 20'000'000;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

// Max-norm error measure. The RMS variant averages a localized error over
// every element, which lets density-matrix runs drift out of positivity.
template <class State>
double scaled_norm(const State& e, const State& y0, const State& y1, double tol) {
  const auto scale = tol + tol * y0.array().abs().max(y1.array().abs());
  return (e.array().abs() / scale).maxCoeff();
}

template <class State>
double scaled_norm(const State& v, const State& y, double tol) {
  return (v.array().abs() / (tol + tol * y.array().abs())).maxCoeff();
}

// Adaptive Dormand-Prince 5(4) with FSAL. Steps are shortened to land exactly
// on each sample time; on_sample(i, t, y) is called there.
template <class State, class Rhs, class OnSample>
IntegratorStats dopri5(Rhs&& f, State& y, double t0, const std::vector<double>& samples, double tol, double max_step,
                       OnSample&& on_sample) {
  IntegratorStats stats;
  stats.tolerance = tol;
  if (samples.empty()) return stats;
  const double span = samples.back() - t0;
  double t = t0;

  State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, ytmp = y, ynew = y, err = y;
  f(t, y, k1);
  ++stats.rhs_evaluations;

  // Initial step (Hairer, Norsett & Wanner II.4).
  double h = 0.0;
  {
    const double d0 = scaled_norm(y, y, tol);
    const double d1 = scaled_norm(k1, y, tol);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * std::max(span, 1e-300) : 0.01 * d0 / d1;
    if (span > 0.0) h0 = std::min(h0, span);
    ytmp = y + h0 * k1;
    f(t + h0, ytmp, k2);
    ++stats.rhs_evaluations;
    const double d2 = scaled_norm(State(k2 - k1), y, tol) / h0;
    const double m = std::max(d1, d2);
    const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 1.0 / 5.0);
    h = std::min(100.0 * h0, h1);
  }
  if (max_step > 0.0) h = std::min(h, max_step);

  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double ts = samples[i];
    while (t < ts) {
      if (stats.steps + stats.rejected > kMaxSteps) {
        throw NumericalError(fmt::format("step budget exhausted at t = {:.6e} s", t), t);
      }
      double step = h;
      bool clamped = false;
      if (t + step >= ts - 1e-3 * step) {
        step = ts - t;
        clamped = true;
      }
      if (step < 16.0 * eps * std::max(std::abs(t), std::abs(span))) {
        throw NumericalError(fmt::format("step size underflow at t = {:.9e} s (h = {:.3e} s)", t, step), t);
      }

      ytmp = y + step * a21 * k1;
      f(t + c2 * step, ytmp, k2);
      ytmp = y + step * (a31 * k1 + a32 * k2);
      f(t + c3 * step, ytmp, k3);
      ytmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
      f(t + c4 * step, ytmp, k4);
      ytmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      f(t + c5 * step, ytmp, k5);
      ytmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      f(t + step, ytmp, k6);
      ynew = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const double t_new = clamped ? ts : t + step;
      f(t_new, ynew, k7);
      stats.rhs_evaluations += 6;
      err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double en = scaled_norm(err, y, ynew, tol);

      if (!std::isfinite(en)) {
        ++stats.rejected;
        h = 0.1 * step;
        continue;
      }
      if (en <= 1.0) {
        ++stats.steps;
        t = t_new;
        std::swap(y, ynew);
        std::swap(k1, k7);  // FSAL
        const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
        h = clamped ? std::max(h, fac * step) : fac * step;
      } else {
        ++stats.rejected;
        h = step * std::max(0.2, 0.9 * std::pow(en, -0.2));
      }
      if (max_step > 0.0) h = std::min(h, max_step);
    }
    on_sample(i, t, y);
  }
  return stats;
}

std::vector<double> sample_grid(double t0, double t1, const EvolveOptions& options) {
  if (!(t1 >= t0)) throw InvalidArgumentError("evolution end time precedes start time");
  if (!(options.tol >= 1e-14 && options.tol <= 1e-3)) {
    throw InvalidArgumentError(fmt::format("tolerance {} outside [1e-14, 1e-3]", options.tol));
  }
  std::vector<double> grid;
  if (!options.sample_times.empty()) {
    grid = options.sample_times;
    if (!std::is_sorted(grid.begin(), grid.end())) throw InvalidArgumentError("sample_times must be ascending");
    if (grid.front() < t0 || grid.back() > t1 * (1.0 + 1e-15) + 1e-300) {
      throw InvalidArgumentError("sample_times must lie inside [t0, t1]");
    }
  } else {
    const std::size_t n = std::max<std::size_t>(options.samples, 2);
    grid.resize(n);
    for (std::size_t i = 0; i < n; ++i) grid[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
    grid.back() = t1;
  }
  return grid;
}

SparseMatrix as_sparse(const Operator& op) { return op.is_sparse() ? op.sparse() : op.to_sparse(); }

// out (+)= S X for CSR S and column-major X. Plain loops beat Eigen's generic
// sparse-dense product by about 2x at the sizes used here.
void csr_times(const SparseMatrix& s, const DenseMatrix& x, DenseMatrix& out, bool accumulate) {
  const Eigen::Index n = s.rows();
  const auto* outer = s.outerIndexPtr();
  const auto* inner = s.innerIndexPtr();
  const cplx* val = s.valuePtr();
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const cplx* xc = x.data() + j * x.rows();
    cplx* oc = out.data() + j * n;
    for (Eigen::Index i = 0; i < n; ++i) {
      double re = 0.0, im = 0.0;
      for (auto p = outer[i]; p < outer[i + 1]; ++p) {
        const cplx v = val[p];
        const cplx xv = xc[inner[p]];
        re += v.real() * xv.real() - v.imag() * xv.imag();
        im += v.real() * xv.imag() + v.imag() * xv.real();
      }
      if (accumulate) {
        oc[i] += cplx(re, im);
      } else {
        oc[i] = cplx(re, im);
      }
    }
  }
}

// Values of `op` laid out on the sparsity pattern of `pattern` (which must contain it).
std::vector<cplx> aligned_values(const SparseMatrix& pattern, const SparseMatrix& op) {
  std::vector<cplx> vals(static_cast<std::size_t>(pattern.nonZeros()), cplx(0.0));
  const auto* outer = pattern.outerIndexPtr();
  const auto* inner = pattern.innerIndexPtr();
  for (Eigen::Index i = 0; i < op.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(op, i); it; ++it) {
      const auto* first = inner + outer[i];
      const auto* last = inner + outer[i + 1];
      const auto* pos = std::lower_bound(first, last, static_cast<int>(it.col()));
      vals[static_cast<std::size_t>(pos - inner)] += it.value();
    }
  }
  return vals;
}

void check_probes(const Probes& probes, const HilbertSpace& space) {
  for (const auto& [label, ket] : probes.overlaps) {
    if (!(ket.space() == space)) throw SpaceMismatchError(fmt::format("probe '{}' lives on another space", label));
  }
  for (const auto& [label, op] : probes.expectations) {
    if (!(op.space() == space)) throw SpaceMismatchError(fmt::format("probe '{}' lives on another space", label));
  }
}

}  // namespace

// ---------------------------------------------------------------------------

void EvolutionResult::write_csv(std::ostream& out) const {
  out << "time";
  for (const auto& [name, _] : records) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < times.size(); ++i) {
    out << fmt::format("{}", times[i]);
    for (const auto& [_, values] : records) out << ',' << fmt::format("{}", values[i]);
    out << '\n';
  }
}

void NoiseSpec::add(std::string label, Operator op, double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw InvalidArgumentError(fmt::format("noise channel '{}': rate {} must be finite and non-negative", label, rate));
  }
  if (!channels_.empty() && !(channels_.front().op.space() == op.space())) {
    throw SpaceMismatchError(fmt::format("noise channel '{}' lives on another space", label));
  }
  channels_.push_back({std::move(label), std::move(op), rate});
}

NoiseSpec NoiseSpec::for_model(const FullModel& model, const NoiseRates& r) {
  for (double v : {r.kappa, r.gamma, r.kappa0, r.gamma0}) {
    if (!(v >= 0.0)) throw InvalidArgumentError("noise rates must be non-negative");
  }
  NoiseSpec spec;
  if (r.kappa > 0) {
    spec.add("kappa_k1", model.lowering(1), r.kappa);
    spec.add("kappa_k2", model.lowering(2), r.kappa);
  }
  if (r.gamma > 0) {
    spec.add("gamma_k1", model.number(1), r.gamma);
    spec.add("gamma_k2", model.number(2), r.gamma);
  }
  if (r.kappa0 > 0) spec.add("kappa_cavity", model.lowering(0), r.kappa0);
  if (r.gamma0 > 0) spec.add("gamma_cavity", model.number(0), r.gamma0);
  return spec;
}

// ---------------------------------------------------------------------------

EvolutionResult evolve_state(const TimeDependentOperator& H, const Ket& psi0, double t0, double t1,
                             const EvolveOptions& options, const Probes& probes) {
  if (!(psi0.space() == H.space())) throw SpaceMismatchError("evolve_state: initial state on another space");
  check_probes(probes, H.space());
  const std::vector<double> grid = sample_grid(t0, t1, options);

  EvolutionResult result;
  result.times = grid;
  for (const auto& [label, _] : probes.overlaps) result.records[label].reserve(grid.size());
  for (const auto& [label, _] : probes.expectations) result.records[label].reserve(grid.size());
  auto& norm_rec = result.records["norm"];

  const cplx minus_i(0.0, -1.0);
  auto rhs = [&](double t, const Vector& x, Vector& dx) {
    H.apply(t, x, dx);
    dx *= minus_i;
  };
  const HilbertSpace& space = H.space();
  auto on_sample = [&](std::size_t, double t, const Vector& y) {
    const double n = y.norm();
    norm_rec.push_back(n);
    result.max_norm_drift = std::max(result.max_norm_drift, std::abs(n - 1.0));
    for (const auto& [label, ket] : probes.overlaps) {
      result.records[label].push_back(std::norm(ket.amplitudes().dot(y)));
    }
    for (const auto& [label, op] : probes.expectations) {
      result.records[label].push_back(y.dot(op.apply(y)).real());
    }
    if (options.keep_states) result.kets.emplace_back(space, y);
    if (!y.allFinite()) throw NumericalError("state became non-finite", t);
  };

  Vector y = psi0.amplitudes();
  result.stats = dopri5(rhs, y, t0, grid, options.tol, options.max_step, on_sample);
  result.final_state = Ket(space, y);
  spdlog::debug("evolve_state: {} steps, {} rejected, norm drift {:.2e}", result.stats.steps, result.stats.rejected,
                result.max_norm_drift);
  return result;
}

EvolutionResult evolve_master(const TimeDependentOperator& H, const NoiseSpec& noise, const DensityOperator& rho0,
                              double t0, double t1, const EvolveOptions& options, const Probes& probes) {
  if (!(rho0.space() == H.space())) throw SpaceMismatchError("evolve_master: initial state on another space");
  for (const auto& ch : noise.channels()) {
    if (!(ch.op.space() == H.space())) throw SpaceMismatchError("evolve_master: noise channel on another space");
    if (!(ch.rate >= 0.0)) throw InvalidArgumentError("evolve_master: negative rate");
  }
  check_probes(probes, H.space());
  const std::vector<double> grid = sample_grid(t0, t1, options);
  const auto dim = static_cast<Eigen::Index>(H.space().total_dim());

  std::vector<SparseMatrix> h_ops;
  for (const auto& term : H.terms()) h_ops.push_back(as_sparse(term.op));
  std::vector<SparseMatrix> jumps;
  SparseMatrix decay(dim, dim);  // (1/2) sum_j gamma_j L_j^+ L_j
  for (const auto& ch : noise.channels()) {
    if (ch.rate == 0.0) continue;
    SparseMatrix l = as_sparse(ch.op) * cplx(std::sqrt(ch.rate));
    l.makeCompressed();
    decay += SparseMatrix(SparseMatrix(l.adjoint()) * l);
    jumps.push_back(std::move(l));
  }
  decay *= cplx(0.5);

  // K(t) = -i H(t) - decay shares one sparsity pattern; only values change with t.
  SparseMatrix pattern = decay;
  for (const auto& h : h_ops) pattern += h;
  pattern.makeCompressed();
  for (Eigen::Index k = 0; k < pattern.nonZeros(); ++k) pattern.valuePtr()[k] = cplx(1.0);
  const std::vector<cplx> decay_vals = aligned_values(pattern, decay);
  std::vector<std::vector<cplx>> term_vals;
  for (const auto& h : h_ops) term_vals.push_back(aligned_values(pattern, h));
  SparseMatrix kt = pattern;

  DenseMatrix m(dim, dim), tmp(dim, dim), tmp2(dim, dim);
  const cplx minus_i(0.0, -1.0);
  auto rhs = [&](double t, const DenseMatrix& rho, DenseMatrix& drho) {
    // M = K rho; drho = M + M^+ + sum L rho L^+.
    cplx* v = kt.valuePtr();
    const std::size_t nnz = decay_vals.size();
    for (std::size_t p = 0; p < nnz; ++p) v[p] = -decay_vals[p];
    for (std::size_t j = 0; j < term_vals.size(); ++j) {
      const cplx c = minus_i * H.coefficient(j, t);
      const auto& tv = term_vals[j];
      for (std::size_t p = 0; p < nnz; ++p) v[p] += c * tv[p];
    }
    csr_times(kt, rho, m, false);
    drho = m + m.adjoint();
    for (const auto& l : jumps) {
      csr_times(l, rho, tmp, false);
      tmp2 = tmp.adjoint();
      csr_times(l, tmp2, drho, true);
    }
  };

  EvolutionResult result;
  result.times = grid;
  auto& trace_rec = result.records["trace"];
  const HilbertSpace& space = H.space();
  const std::size_t mid = grid.size() / 2;
  result.min_eigenvalue = std::numeric_limits<double>::infinity();
  auto on_sample = [&](std::size_t i, double t, const DenseMatrix& rho) {
    if (!rho.allFinite()) throw NumericalError("density operator became non-finite", t);
    const double tr = rho.trace().real();
    trace_rec.push_back(tr);
    result.max_norm_drift = std::max(result.max_norm_drift, std::abs(tr - 1.0));
    result.max_hermiticity_deviation =
        std::max(result.max_hermiticity_deviation, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    for (const auto& [label, ket] : probes.overlaps) {
      const Vector& k = ket.amplitudes();
      result.records[label].push_back(k.dot(rho * k).real());
    }
    for (const auto& [label, op] : probes.expectations) {
      const DenseMatrix orho = as_sparse(op) * rho;
      result.records[label].push_back(orho.trace().real());
    }
    if (i == mid || i + 1 == grid.size()) {
      result.min_eigenvalue = std::min(result.min_eigenvalue, DensityOperator(space, rho).min_eigenvalue());
    }
    if (options.keep_states) result.densities.emplace_back(space, rho);
  };

  DenseMatrix rho = rho0.matrix();
  result.stats = dopri5(rhs, rho, t0, grid, options.tol, options.max_step, on_sample);
  result.final_state = DensityOperator(space, rho);
  spdlog::debug("evolve_master: {} steps, {} rejected, trace drift {:.2e}, min eig {:.2e}", result.stats.steps,
                result.stats.rejected, result.max_norm_drift, result.min_eigenvalue);
  return result;
}

DenseMatrix evolve_propagator(const TimeDependentOperator& H, double t0, double t1, double tol) {
  const auto dim = static_cast<Eigen::Index>(H.space().total_dim());
  std::vector<DenseMatrix> ops;
  for (const auto& term : H.terms()) ops.push_back(term.op.to_dense());
  const cplx minus_i(0.0, -1.0);
  DenseMatrix tmp(dim, dim);
  auto rhs = [&](double t, const DenseMatrix& u, DenseMatrix& du) {
    du.setZero(dim, dim);
    for (std::size_t j = 0; j < ops.size(); ++j) {
      tmp.noalias() = ops[j] * u;
      du += (minus_i * H.coefficient(j, t)) * tmp;
    }
  };
  DenseMatrix u = DenseMatrix::Identity(dim, dim);
  if (t1 == t0) return u;
  dopri5(rhs, u, t0, std::vector<double>{t1}, tol, 0.0, [](std::size_t, double, const DenseMatrix&) {});
  return u;
}

// ---------------------------------------------------------------------------

MagnusCoefficients magnus_coefficients(const SystemParams& p, double t) {
  if (p.Delta == 0.0) throw InvalidArgumentError("magnus_coefficients: Delta must be non-zero");
  const double r = 2.0 * p.J * p.alpha / p.Delta;
  const cplx i(0.0, 1.0);
  const double phase = p.Delta * t;
  return MagnusCoefficients{i * r * (1.0 - std::polar(1.0, phase)), r * r * (std::sin(phase) - phase)};
}

Operator magnus_propagator(const SystemParams& params, double t, MagnusModel model) {
  const HilbertSpace space = effective_space(params.cutoffs.cavity);
  const DenseMatrix sx = effective_sx(space).to_dense();
  const DenseMatrix sx2 = sx * sx;
  const DenseMatrix a0 = embed(annihilation(params.cutoffs.cavity), "cavity", space).to_dense();
  const DenseMatrix ad = a0.adjoint();
  const cplx minus_i(0.0, -1.0);

  if (model == MagnusModel::SingleTone) {
    const MagnusCoefficients c = magnus_coefficients(params, t);
    const DenseMatrix g = (c.chi * ad + std::conj(c.chi) * a0) * sx + c.beta * sx2;
    return Operator(space, expm(DenseMatrix(minus_i * g)), Storage::Dense);
  }
  const cplx i(0.0, 1.0);
  const DenseMatrix x = (a0 + ad) / std::numbers::sqrt2;
  const DenseMatrix p = i * (ad - a0) / std::numbers::sqrt2;
  const TrajectoryPoint pt = trajectory(params, t);
  const double F = pt.F;
  const double G = -pt.G;
  const double A = -pt.A;
  const DenseMatrix u = expm(DenseMatrix(minus_i * F * sx * x)) * expm(DenseMatrix(minus_i * G * sx * p)) *
                        expm(DenseMatrix(minus_i * A * sx2));
  return Operator(space, u, Storage::Dense);
}

Operator ms_gate_ideal() {
  const HilbertSpace space({{"q1", 2}, {"q2", 2}});
  const Operator sx = qubit_paulis().sx;
  const DenseMatrix s = ((embed(sx, "q1", space) + embed(sx, "q2", space)) * cplx(0.5)).to_dense();
  return Operator(space, expm(DenseMatrix(cplx(0.0, std::numbers::pi / 2.0) * s * s)), Storage::Dense);
}

}  // namespace katsim
