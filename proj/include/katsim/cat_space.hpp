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

#include <vector>

#include "katsim/fock.hpp"

namespace katsim {

/// Sign of a cat superposition. |C+> is even in photon number, |C-> is odd.
enum class CatSign { Plus, Minus };

/// Cat-level Pauli operators. Qubit index 0 is |C+>, index 1 is |C->.
struct CatPauliSet {
  Operator sx;
  Operator sy;
  Operator sz;
  Operator sp;  // |C-><C+|
  Operator sm;  // |C+><C-|
};

/// Cat states and displaced-Fock excitations of one KPO at fixed alpha.
///
/// Excited states |psi^{e,v}_+-> = N^e [D(alpha) -+ D(-alpha)]|v> are
/// Gram-Schmidt orthonormalized in the order C+, C-, (v=1: +, -), (v=2: +, -), ...
class CatBasis {
 public:
  CatBasis(double alpha, int cutoff, int v_max = 1);

  double alpha() const { return alpha_; }
  int cutoff() const { return cutoff_; }
  int v_max() const { return v_max_; }
  const HilbertSpace& space() const { return cats_[0].space(); }

  const Ket& cat(CatSign sign) const { return cats_[sign == CatSign::Plus ? 0 : 1]; }
  const Ket& plus() const { return cats_[0]; }
  const Ket& minus() const { return cats_[1]; }

  /// Analytic normalization [2(1 +- e^{-2 alpha^2})]^{-1/2}.
  double cat_norm(CatSign sign) const;

  const Ket& excited(CatSign sign, int v) const;
  /// 1 / ||[D(alpha) -+ D(-alpha)]|v>|| before orthogonalization.
  double excited_norm(CatSign sign, int v) const;

  /// C+, C-, then the excited states in construction order.
  std::vector<Ket> orthonormal_basis() const;
  Operator projector() const;
  CatPauliSet paulis() const;

 private:
  double alpha_;
  int cutoff_;
  int v_max_;
  std::vector<Ket> cats_;
  std::vector<Ket> excited_;  // index 2*(v-1) + (sign == Minus)
  std::vector<double> excited_norms_;
};

Ket cat_state(double alpha, CatSign sign, int cutoff);
Ket excited_cat(double alpha, CatSign sign, int v, int cutoff);
Operator cat_projector(double alpha, int v_max, int cutoff);

/// Smallest KPO cutoff that holds a cat of amplitude alpha: ceil(|a|^2 + 5|a| + 4).
int default_kpo_cutoff(double alpha);

/// Sx = (sigma_x^{(1)} + sigma_x^{(2)}) / 2 on the two named factors of `space`,
/// using the Fock-space cat Paulis of `basis`.
Operator collective_sx(const CatBasis& basis, const HilbertSpace& space, std::string_view kpo1 = "k1",
                       std::string_view kpo2 = "k2");

// Two-level cat-qubit operators (dimension 2).
CatPauliSet qubit_paulis();

/// Single-photon loss reduced to the cat qubit:
///   L = alpha / (1 - e^{-4 alpha^2})^{1/4} (sigma_x + i e^{-2 alpha^2} sigma_y),
/// so that D[L] carries the bit-flip prefactor alpha^2 / sqrt(1 - e^{-4 alpha^2}).
/// sigma_y is the standard Hermitian one. With it, L is P a P up to a factor
/// (1 - e^{-4 alpha^2})^{1/4}: a|C+> = alpha sqrt(tanh alpha^2)|C->.
Operator effective_loss_jump(double alpha);

/// Approximate gap 4 K alpha^2 between the cat manifold and the first excited pair.
double energy_gap(double K, double alpha);

}  // namespace katsim
