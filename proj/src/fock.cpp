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

#include "katsim/fock.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <unsupported/Eigen/MatrixFunctions>

namespace katsim {

namespace {

bool want_sparse(Storage storage, std::size_t dim) {
  switch (storage) {
    case Storage::Dense:
      return false;
    case Storage::Sparse:
      return true;
    case Storage::Auto:
      break;
  }
  return dim > kSparseThreshold;
}

void require_same_space(const HilbertSpace& a, const HilbertSpace& b, const char* where) {
  if (!(a == b)) {
    throw SpaceMismatchError(fmt::format("{}: operands live on different Hilbert spaces", where));
  }
}

std::shared_ptr<const HilbertSpace> share(HilbertSpace space) {
  return std::make_shared<const HilbertSpace>(std::move(space));
}

}  // namespace

// ---------------------------------------------------------------------------
// HilbertSpace

HilbertSpace::HilbertSpace(std::vector<Factor> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw InvalidDimensionError("HilbertSpace needs at least one factor");
  std::set<std::string> seen;
  for (const auto& f : factors_) {
    if (f.cutoff < 1) {
      throw InvalidDimensionError(fmt::format("factor '{}' has non-positive cutoff {}", f.label, f.cutoff));
    }
    if (!seen.insert(f.label).second) {
      throw InvalidArgumentError(fmt::format("duplicate factor label '{}'", f.label));
    }
    total_dim_ *= static_cast<std::size_t>(f.cutoff);
  }
}

HilbertSpace HilbertSpace::single(int cutoff, std::string label) {
  return HilbertSpace({Factor{std::move(label), cutoff}});
}

std::size_t HilbertSpace::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].label == label) return i;
  }
  throw InvalidArgumentError(fmt::format("unknown factor label '{}'", label));
}

bool HilbertSpace::has(std::string_view label) const {
  return std::any_of(factors_.begin(), factors_.end(), [&](const Factor& f) { return f.label == label; });
}

std::size_t HilbertSpace::stride(std::size_t factor) const {
  std::size_t s = 1;
  for (std::size_t i = factor + 1; i < factors_.size(); ++i) s *= static_cast<std::size_t>(factors_[i].cutoff);
  return s;
}

// ---------------------------------------------------------------------------
// Operator

Operator::Operator(std::shared_ptr<const HilbertSpace> space, std::variant<DenseMatrix, SparseMatrix> storage)
    : space_(std::move(space)), storage_(std::move(storage)) {}

Operator::Operator(HilbertSpace space, DenseMatrix matrix, Storage storage) : space_(share(std::move(space))) {
  const auto n = static_cast<Eigen::Index>(space_->total_dim());
  if (matrix.rows() != n || matrix.cols() != n) {
    throw InvalidDimensionError(
        fmt::format("operator is {}x{}, space dimension is {}", matrix.rows(), matrix.cols(), n));
  }
  if (want_sparse(storage, space_->total_dim())) {
    storage_ = SparseMatrix(matrix.sparseView());
  } else {
    storage_ = std::move(matrix);
  }
}

Operator::Operator(HilbertSpace space, SparseMatrix matrix, Storage storage) : space_(share(std::move(space))) {
  const auto n = static_cast<Eigen::Index>(space_->total_dim());
  if (matrix.rows() != n || matrix.cols() != n) {
    throw InvalidDimensionError(
        fmt::format("operator is {}x{}, space dimension is {}", matrix.rows(), matrix.cols(), n));
  }
  if (want_sparse(storage, space_->total_dim())) {
    matrix.makeCompressed();
    storage_ = std::move(matrix);
  } else {
    storage_ = DenseMatrix(matrix);
  }
}

Operator Operator::identity(const HilbertSpace& space, Storage storage) {
  const auto n = static_cast<Eigen::Index>(space.total_dim());
  SparseMatrix id(n, n);
  id.setIdentity();
  return Operator(space, std::move(id), storage);
}

Operator Operator::zero(const HilbertSpace& space, Storage storage) {
  const auto n = static_cast<Eigen::Index>(space.total_dim());
  return Operator(space, SparseMatrix(n, n), storage);
}

DenseMatrix Operator::to_dense() const {
  if (is_sparse()) return DenseMatrix(sparse());
  return dense();
}

SparseMatrix Operator::to_sparse() const {
  if (is_sparse()) return sparse();
  return SparseMatrix(dense().sparseView());
}

Operator Operator::as(Storage storage) const {
  if (want_sparse(storage, dim())) return Operator(space_, to_sparse());
  return Operator(space_, to_dense());
}

Operator Operator::adjoint() const {
  if (is_sparse()) return Operator(space_, SparseMatrix(sparse().adjoint()));
  return Operator(space_, DenseMatrix(dense().adjoint()));
}

cplx Operator::trace() const {
  if (is_sparse()) {
    cplx t = 0.0;
    const auto& m = sparse();
    for (Eigen::Index i = 0; i < m.outerSize(); ++i) t += m.coeff(i, i);
    return t;
  }
  return dense().trace();
}

cplx Operator::element(std::size_t row, std::size_t col) const {
  const auto r = static_cast<Eigen::Index>(row);
  const auto c = static_cast<Eigen::Index>(col);
  return is_sparse() ? sparse().coeff(r, c) : dense()(r, c);
}

void Operator::apply_add(cplx coeff, const Vector& x, Vector& y) const {
  if (is_sparse()) {
    y.noalias() += coeff * (sparse() * x);
  } else {
    y.noalias() += coeff * (dense() * x);
  }
}

Vector Operator::apply(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) {
    throw InvalidDimensionError(fmt::format("vector of length {} applied to operator of dim {}", x.size(), dim()));
  }
  Vector y = Vector::Zero(x.size());
  apply_add(1.0, x, y);
  return y;
}

double Operator::max_abs_diff(const Operator& other) const {
  require_same_space(space(), other.space(), "max_abs_diff");
  if (is_sparse() && other.is_sparse()) {
    const SparseMatrix d = sparse() - other.sparse();
    double m = 0.0;
    for (Eigen::Index k = 0; k < d.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(d, k); it; ++it) m = std::max(m, std::abs(it.value()));
    }
    return m;
  }
  return (to_dense() - other.to_dense()).cwiseAbs().maxCoeff();
}

double Operator::hermiticity_deviation() const { return max_abs_diff(adjoint()); }

Operator Operator::operator+(const Operator& rhs) const {
  require_same_space(space(), rhs.space(), "operator+");
  if (is_sparse() && rhs.is_sparse()) return Operator(space_, SparseMatrix(sparse() + rhs.sparse()));
  if (is_sparse()) return Operator(space_, DenseMatrix(sparse() + rhs.dense()));
  if (rhs.is_sparse()) return Operator(space_, DenseMatrix(dense() + rhs.sparse()));
  return Operator(space_, DenseMatrix(dense() + rhs.dense()));
}

Operator Operator::operator-(const Operator& rhs) const { return *this + rhs * cplx(-1.0); }

Operator Operator::operator*(const Operator& rhs) const {
  require_same_space(space(), rhs.space(), "operator*");
  if (is_sparse() && rhs.is_sparse()) {
    SparseMatrix p = (sparse() * rhs.sparse()).pruned();
    return Operator(space_, std::move(p));
  }
  if (is_sparse()) return Operator(space_, DenseMatrix(sparse() * rhs.dense()));
  if (rhs.is_sparse()) return Operator(space_, DenseMatrix(dense() * rhs.sparse()));
  return Operator(space_, DenseMatrix(dense() * rhs.dense()));
}

Operator Operator::operator*(cplx scale) const {
  if (is_sparse()) return Operator(space_, SparseMatrix(sparse() * scale));
  return Operator(space_, DenseMatrix(dense() * scale));
}

// ---------------------------------------------------------------------------
// Ket / DensityOperator

Ket::Ket(HilbertSpace space, Vector amplitudes) : space_(share(std::move(space))), amplitudes_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amplitudes_.size()) != space_->total_dim()) {
    throw InvalidDimensionError(
        fmt::format("ket has {} amplitudes, space dimension is {}", amplitudes_.size(), space_->total_dim()));
  }
}

Ket Ket::normalized() const {
  const double n = norm();
  if (n == 0.0) throw DegenerateStateError("cannot normalize the zero vector");
  return Ket(*space_, amplitudes_ / n);
}

cplx Ket::inner(const Ket& other) const {
  require_same_space(space(), other.space(), "Ket::inner");
  return amplitudes_.dot(other.amplitudes_);
}

DensityOperator::DensityOperator(HilbertSpace space, DenseMatrix matrix)
    : space_(share(std::move(space))), matrix_(std::move(matrix)) {
  const auto n = static_cast<Eigen::Index>(space_->total_dim());
  if (matrix_.rows() != n || matrix_.cols() != n) {
    throw InvalidDimensionError(fmt::format("density matrix is {}x{}, space dimension is {}", matrix_.rows(),
                                            matrix_.cols(), n));
  }
}

DensityOperator DensityOperator::pure(const Ket& ket) {
  return DensityOperator(ket.space(), ket.amplitudes() * ket.amplitudes().adjoint());
}

double DensityOperator::hermiticity_deviation() const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityOperator::min_eigenvalue() const {
  const DenseMatrix h = 0.5 * (matrix_ + matrix_.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Constructors

Operator annihilation(int cutoff, Storage storage) {
  if (cutoff < 2) throw InvalidDimensionError(fmt::format("annihilation operator needs cutoff >= 2, got {}", cutoff));
  SparseMatrix a(cutoff, cutoff);
  a.reserve(Eigen::VectorXi::Constant(cutoff, 1));
  for (int n = 1; n < cutoff; ++n) a.insert(n - 1, n) = std::sqrt(static_cast<double>(n));
  return Operator(HilbertSpace::single(cutoff), std::move(a), storage);
}

Operator creation(int cutoff, Storage storage) { return annihilation(cutoff, storage).adjoint(); }

Operator number(int cutoff, Storage storage) {
  if (cutoff < 1) throw InvalidDimensionError("number operator needs cutoff >= 1");
  SparseMatrix n(cutoff, cutoff);
  n.reserve(Eigen::VectorXi::Constant(cutoff, 1));
  for (int k = 0; k < cutoff; ++k) n.insert(k, k) = static_cast<double>(k);
  return Operator(HilbertSpace::single(cutoff), std::move(n), storage);
}

Operator embed(const Operator& op, std::string_view factor_label, const HilbertSpace& space, Storage storage) {
  const std::size_t f = space.index_of(factor_label);
  const auto cutoff = static_cast<std::size_t>(space.factors()[f].cutoff);
  if (op.dim() != cutoff) {
    throw InvalidDimensionError(
        fmt::format("operator of dim {} cannot act on factor '{}' with cutoff {}", op.dim(), factor_label, cutoff));
  }
  const std::size_t inner = space.stride(f);
  const std::size_t outer = space.total_dim() / (inner * cutoff);
  const SparseMatrix local = op.to_sparse();

  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(static_cast<std::size_t>(local.nonZeros()) * inner * outer);
  for (std::size_t o = 0; o < outer; ++o) {
    for (Eigen::Index r = 0; r < local.outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(local, r); it; ++it) {
        const std::size_t row0 = (o * cutoff + static_cast<std::size_t>(it.row())) * inner;
        const std::size_t col0 = (o * cutoff + static_cast<std::size_t>(it.col())) * inner;
        for (std::size_t i = 0; i < inner; ++i) {
          triplets.emplace_back(static_cast<int>(row0 + i), static_cast<int>(col0 + i), it.value());
        }
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(space.total_dim());
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return Operator(space, std::move(m), storage);
}

Ket product_state(const HilbertSpace& space, std::span<const Ket> factors) {
  if (factors.size() != space.num_factors()) {
    throw InvalidDimensionError(
        fmt::format("product_state got {} factors for a {}-factor space", factors.size(), space.num_factors()));
  }
  Vector v = Vector::Ones(1);
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const auto& amp = factors[i].amplitudes();
    if (amp.size() != space.factors()[i].cutoff) {
      throw InvalidDimensionError(fmt::format("factor '{}' expects dimension {}, got {}", space.factors()[i].label,
                                              space.factors()[i].cutoff, amp.size()));
    }
    Vector next(v.size() * amp.size());
    for (Eigen::Index j = 0; j < v.size(); ++j) next.segment(j * amp.size(), amp.size()) = v(j) * amp;
    v = std::move(next);
  }
  return Ket(space, std::move(v));
}

Ket fock_state(int n, int cutoff) {
  if (n < 0 || n >= cutoff) throw InvalidDimensionError(fmt::format("Fock level {} outside cutoff {}", n, cutoff));
  Vector v = Vector::Zero(cutoff);
  v(n) = 1.0;
  return Ket(HilbertSpace::single(cutoff), std::move(v));
}

Ket coherent_state(cplx alpha, int cutoff) {
  if (cutoff < 1) throw InvalidDimensionError("coherent state needs cutoff >= 1");
  Vector v(cutoff);
  v(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < cutoff; ++n) v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  const double norm2 = v.squaredNorm();
  const double deficit = 1.0 - norm2;
  if (deficit > kTruncationTolerance) {
    throw TruncationLossError(
        fmt::format("coherent state |alpha|={} loses {:.3e} of its norm at cutoff {}", std::abs(alpha), deficit, cutoff),
        deficit);
  }
  if (deficit > 0.0) spdlog::debug("coherent_state: |alpha|={} cutoff={} norm deficit {:.3e}", std::abs(alpha), cutoff, deficit);
  return Ket(HilbertSpace::single(cutoff), v / std::sqrt(norm2));
}

Operator displacement(cplx alpha, int cutoff) {
  const Operator a = annihilation(cutoff, Storage::Dense);
  const Operator generator = a.adjoint() * alpha - a * std::conj(alpha);
  return expm(generator);
}

DenseMatrix expm(const DenseMatrix& m) {
  if (!m.allFinite()) throw InvalidArgumentError("expm: matrix has non-finite entries");
  return m.exp();
}

Operator expm(const Operator& op) {
  DenseMatrix e = expm(op.to_dense());
  return Operator(op.space(), std::move(e), op.is_sparse() ? Storage::Sparse : Storage::Dense);
}

cplx expectation(const Operator& op, const Ket& state) {
  require_same_space(op.space(), state.space(), "expectation");
  return state.amplitudes().dot(op.apply(state.amplitudes()));
}

cplx expectation(const Operator& op, const DensityOperator& state) {
  require_same_space(op.space(), state.space(), "expectation");
  if (op.is_sparse()) return (op.sparse() * state.matrix()).trace();
  return (op.dense() * state.matrix()).trace();
}

}  // namespace katsim
