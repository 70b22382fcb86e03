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

#include "katsim/cat_space.hpp"

#include <cmath>

#include <fmt/format.h>

namespace katsim {

namespace {

// Displaced Fock states are built in a padded space and then truncated, so the
// truncation check sees the real tail weight instead of an expm edge artifact.
constexpr int kDisplacementPadding = 40;

Vector displaced_fock(double alpha, int v, int cutoff) {
  const int padded = cutoff + v + kDisplacementPadding;
  const DenseMatrix d = displacement(alpha, padded).to_dense();
  return d.col(v);
}

void orthogonalize(Vector& v, const std::vector<Ket>& against) {
  // Two passes of classical Gram-Schmidt.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : against) v -= b.amplitudes() * b.amplitudes().dot(v);
  }
}

}  // namespace

int default_kpo_cutoff(double alpha) {
  const double a = std::abs(alpha);
  return static_cast<int>(std::ceil(a * a + 5.0 * a + 4.0 - 1e-12));
}

Ket cat_state(double alpha, CatSign sign, int cutoff) {
  if (alpha < 0.0) throw InvalidArgumentError("cat_state: alpha must be non-negative");
  if (sign == CatSign::Minus && alpha == 0.0) {
    throw DegenerateStateError("odd cat with alpha = 0 is the zero vector");
  }
  const Ket plus_alpha = coherent_state(alpha, cutoff);
  const Ket minus_alpha = coherent_state(-alpha, cutoff);
  const double s = sign == CatSign::Plus ? 1.0 : -1.0;
  Vector v = plus_alpha.amplitudes() + s * minus_alpha.amplitudes();
  // Zero out the parity that cancels analytically; rounding leaves ~1e-17 there.
  for (Eigen::Index n = (sign == CatSign::Plus ? 1 : 0); n < v.size(); n += 2) v(n) = 0.0;
  return Ket(plus_alpha.space(), v / v.norm());
}

CatBasis::CatBasis(double alpha, int cutoff, int v_max) : alpha_(alpha), cutoff_(cutoff), v_max_(v_max) {
  if (alpha <= 0.0) throw InvalidArgumentError("CatBasis: alpha must be positive");
  if (v_max < 0) throw InvalidArgumentError("CatBasis: v_max must be non-negative");
  cats_.push_back(cat_state(alpha, CatSign::Plus, cutoff));
  cats_.push_back(cat_state(alpha, CatSign::Minus, cutoff));

  std::vector<Ket> built = cats_;
  for (int v = 1; v <= v_max; ++v) {
    const Vector plus = displaced_fock(alpha, v, cutoff);
    const Vector minus = displaced_fock(-alpha, v, cutoff);
    for (CatSign sign : {CatSign::Plus, CatSign::Minus}) {
      // psi_+ uses D(alpha) - D(-alpha), psi_- uses D(alpha) + D(-alpha).
      const Vector full = sign == CatSign::Plus ? Vector(plus - minus) : Vector(plus + minus);
      const double full_norm2 = full.squaredNorm();
      Vector raw = full.head(cutoff);
      const double deficit = 1.0 - raw.squaredNorm() / full_norm2;
      if (deficit > kTruncationTolerance) {
        throw TruncationLossError(
            fmt::format("excited cat v={} at alpha={} loses {:.3e} of its norm at cutoff {}", v, alpha, deficit, cutoff),
            deficit);
      }
      excited_norms_.push_back(1.0 / std::sqrt(full_norm2));
      orthogonalize(raw, built);
      const double n = raw.norm();
      if (n < 1e-8) {
        throw DegenerateStateError(fmt::format("excited cat v={} is linearly dependent on lower states", v));
      }
      Ket k(HilbertSpace::single(cutoff), raw / n);
      built.push_back(k);
      excited_.push_back(std::move(k));
    }
  }
}

double CatBasis::cat_norm(CatSign sign) const {
  const double s = sign == CatSign::Plus ? 1.0 : -1.0;
  return 1.0 / std::sqrt(2.0 * (1.0 + s * std::exp(-2.0 * alpha_ * alpha_)));
}

const Ket& CatBasis::excited(CatSign sign, int v) const {
  if (v < 1 || v > v_max_) throw InvalidArgumentError(fmt::format("excited level {} outside 1..{}", v, v_max_));
  return excited_[static_cast<std::size_t>(2 * (v - 1) + (sign == CatSign::Minus ? 1 : 0))];
}

double CatBasis::excited_norm(CatSign sign, int v) const {
  if (v < 1 || v > v_max_) throw InvalidArgumentError(fmt::format("excited level {} outside 1..{}", v, v_max_));
  return excited_norms_[static_cast<std::size_t>(2 * (v - 1) + (sign == CatSign::Minus ? 1 : 0))];
}

std::vector<Ket> CatBasis::orthonormal_basis() const {
  std::vector<Ket> out = cats_;
  out.insert(out.end(), excited_.begin(), excited_.end());
  return out;
}

Operator CatBasis::projector() const {
  DenseMatrix p = DenseMatrix::Zero(cutoff_, cutoff_);
  for (const auto& k : orthonormal_basis()) p.noalias() += k.amplitudes() * k.amplitudes().adjoint();
  return Operator(space(), std::move(p), Storage::Dense);
}

CatPauliSet CatBasis::paulis() const {
  const Vector& p = plus().amplitudes();
  const Vector& m = minus().amplitudes();
  const DenseMatrix pp = p * p.adjoint();
  const DenseMatrix mm = m * m.adjoint();
  const DenseMatrix mp = m * p.adjoint();  // |C-><C+|
  const DenseMatrix pm = p * m.adjoint();  // |C+><C-|
  const cplx i(0.0, 1.0);
  return CatPauliSet{
      Operator(space(), DenseMatrix(mp + pm), Storage::Dense),
      Operator(space(), DenseMatrix(i * (mp - pm)), Storage::Dense),
      Operator(space(), DenseMatrix(pp - mm), Storage::Dense),
      Operator(space(), mp, Storage::Dense),
      Operator(space(), pm, Storage::Dense),
  };
}

Ket excited_cat(double alpha, CatSign sign, int v, int cutoff) {
  if (v < 1) throw InvalidArgumentError("excited_cat: v must be >= 1");
  return CatBasis(alpha, cutoff, v).excited(sign, v);
}

Operator cat_projector(double alpha, int v_max, int cutoff) { return CatBasis(alpha, cutoff, v_max).projector(); }

Operator collective_sx(const CatBasis& basis, const HilbertSpace& space, std::string_view kpo1,
                       std::string_view kpo2) {
  const Operator sx = basis.paulis().sx;
  return (embed(sx, kpo1, space) + embed(sx, kpo2, space)) * cplx(0.5);
}

CatPauliSet qubit_paulis() {
  const HilbertSpace q = HilbertSpace::single(2, "qubit");
  const cplx i(0.0, 1.0);
  DenseMatrix sx(2, 2), sy(2, 2), sz(2, 2), sp(2, 2), sm(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, -i, i, 0;
  sz << 1, 0, 0, -1;
  sp << 0, 0, 1, 0;
  sm << 0, 1, 0, 0;
  return CatPauliSet{Operator(q, sx), Operator(q, sy), Operator(q, sz), Operator(q, sp), Operator(q, sm)};
}

Operator effective_loss_jump(double alpha) {
  if (alpha <= 0.0) throw InvalidArgumentError("effective_loss_jump: alpha must be positive");
  const double a2 = alpha * alpha;
  const double scale = alpha / std::pow(1.0 - std::exp(-4.0 * a2), 0.25);
  const auto paulis = qubit_paulis();
  return (paulis.sx + paulis.sy * cplx(0.0, std::exp(-2.0 * a2))) * cplx(scale);
}

double energy_gap(double K, double alpha) {
  if (K <= 0.0) throw InvalidArgumentError("energy_gap: K must be positive");
  return 4.0 * K * alpha * alpha;
}

}  // namespace katsim
