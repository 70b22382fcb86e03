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

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "katsim/errors.hpp"

namespace katsim {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

// Operators on spaces larger than this are stored sparse unless asked otherwise.
inline constexpr std::size_t kSparseThreshold = 512;

enum class Storage { Auto, Dense, Sparse };

struct Factor {
  std::string label;
  int cutoff = 0;

  bool operator==(const Factor&) const = default;
};

/// Ordered tensor product of truncated modes.
///
/// Index layout is row-major Kronecker order: the last factor varies fastest,
/// so a basis index is sum_i n_i * stride(i) with stride(last) = 1.
class HilbertSpace {
 public:
  explicit HilbertSpace(std::vector<Factor> factors);

  /// Single-factor space, the default home of single-mode operators.
  static HilbertSpace single(int cutoff, std::string label = "mode");

  const std::vector<Factor>& factors() const { return factors_; }
  std::size_t num_factors() const { return factors_.size(); }
  std::size_t total_dim() const { return total_dim_; }

  std::size_t index_of(std::string_view label) const;
  bool has(std::string_view label) const;
  int cutoff(std::string_view label) const { return factors_[index_of(label)].cutoff; }
  std::size_t stride(std::size_t factor) const;

  bool operator==(const HilbertSpace& other) const { return factors_ == other.factors_; }

 private:
  std::vector<Factor> factors_;
  std::size_t total_dim_ = 1;
};

/// Immutable linear operator on a HilbertSpace, stored dense or sparse.
class Operator {
 public:
  Operator(HilbertSpace space, DenseMatrix matrix, Storage storage = Storage::Auto);
  Operator(HilbertSpace space, SparseMatrix matrix, Storage storage = Storage::Auto);

  static Operator identity(const HilbertSpace& space, Storage storage = Storage::Auto);
  static Operator zero(const HilbertSpace& space, Storage storage = Storage::Auto);

  const HilbertSpace& space() const { return *space_; }
  std::size_t dim() const { return space_->total_dim(); }
  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(storage_); }

  /// Valid only for the matching storage mode.
  const DenseMatrix& dense() const { return std::get<DenseMatrix>(storage_); }
  const SparseMatrix& sparse() const { return std::get<SparseMatrix>(storage_); }

  DenseMatrix to_dense() const;
  SparseMatrix to_sparse() const;
  Operator as(Storage storage) const;

  Operator adjoint() const;
  cplx trace() const;
  cplx element(std::size_t row, std::size_t col) const;

  /// y += coeff * (this * x)
  void apply_add(cplx coeff, const Vector& x, Vector& y) const;
  Vector apply(const Vector& x) const;

  /// Largest elementwise modulus of (this - other).
  double max_abs_diff(const Operator& other) const;
  double hermiticity_deviation() const;

  Operator operator+(const Operator& rhs) const;
  Operator operator-(const Operator& rhs) const;
  Operator operator*(const Operator& rhs) const;
  Operator operator*(cplx scale) const;
  friend Operator operator*(cplx scale, const Operator& op) { return op * scale; }

 private:
  Operator(std::shared_ptr<const HilbertSpace> space, std::variant<DenseMatrix, SparseMatrix> storage);

  std::shared_ptr<const HilbertSpace> space_;
  std::variant<DenseMatrix, SparseMatrix> storage_;
};

class Ket {
 public:
  Ket(HilbertSpace space, Vector amplitudes);

  const HilbertSpace& space() const { return *space_; }
  const Vector& amplitudes() const { return amplitudes_; }
  std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }

  double norm() const { return amplitudes_.norm(); }
  Ket normalized() const;
  /// <this|other>
  cplx inner(const Ket& other) const;

 private:
  std::shared_ptr<const HilbertSpace> space_;
  Vector amplitudes_;
};

class DensityOperator {
 public:
  DensityOperator(HilbertSpace space, DenseMatrix matrix);
  static DensityOperator pure(const Ket& ket);

  const HilbertSpace& space() const { return *space_; }
  const DenseMatrix& matrix() const { return matrix_; }

  cplx trace() const { return matrix_.trace(); }
  double hermiticity_deviation() const;
  double min_eigenvalue() const;

 private:
  std::shared_ptr<const HilbertSpace> space_;
  DenseMatrix matrix_;
};

// Single-mode constructors. The returned operators live on HilbertSpace::single(cutoff).
Operator annihilation(int cutoff, Storage storage = Storage::Auto);
Operator creation(int cutoff, Storage storage = Storage::Auto);
Operator number(int cutoff, Storage storage = Storage::Auto);

/// Places a single-factor operator on the named factor of `space`, identity elsewhere.
Operator embed(const Operator& op, std::string_view factor_label, const HilbertSpace& space,
               Storage storage = Storage::Auto);

/// Kronecker product of single-factor kets in the factor order of `space`.
Ket product_state(const HilbertSpace& space, std::span<const Ket> factors);

Ket fock_state(int n, int cutoff);

/// Truncated coherent state, renormalized. Throws TruncationLossError when the
/// truncated norm deficit exceeds kTruncationTolerance.
Ket coherent_state(cplx alpha, int cutoff);
inline constexpr double kTruncationTolerance = 1e-6;

Operator displacement(cplx alpha, int cutoff);

/// Matrix exponential (scaling and squaring with Pade approximants).
Operator expm(const Operator& op);
DenseMatrix expm(const DenseMatrix& m);

cplx expectation(const Operator& op, const Ket& state);
cplx expectation(const Operator& op, const DensityOperator& state);

}  // namespace katsim
