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

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "katsim/fock.hpp"

namespace katsim {
namespace {

TEST(Ladder, TwoLevel) {
  const DenseMatrix a = annihilation(2).to_dense();
  EXPECT_EQ(a(0, 0), cplx(0.0));
  EXPECT_EQ(a(0, 1), cplx(1.0));
  EXPECT_EQ(a(1, 0), cplx(0.0));
  EXPECT_EQ(a(1, 1), cplx(0.0));
}

TEST(Ladder, EntryRule) {
  // <2|a|3> = sqrt 3
  EXPECT_NEAR(annihilation(4).element(2, 3).real(), std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(creation(4).element(3, 2).real(), std::sqrt(3.0), 1e-15);
}

TEST(Ladder, NumberDiagonal) {
  const DenseMatrix n = number(5).to_dense();
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) EXPECT_EQ(n(i, j), cplx(i == j ? i : 0.0));
  }
}

TEST(Ladder, CommutatorBelowTop) {
  const int c = 9;
  const DenseMatrix a = annihilation(c).to_dense();
  const DenseMatrix comm = a * a.adjoint() - a.adjoint() * a;
  const DenseMatrix d = comm.topLeftCorner(c - 1, c - 1) - DenseMatrix::Identity(c - 1, c - 1);
  EXPECT_LE(d.cwiseAbs().maxCoeff(), 1e-14);
  // the top row carries the truncation artifact
  EXPECT_NEAR(comm(c - 1, c - 1).real(), -(c - 1.0), 1e-14);
}

TEST(Ladder, DenseSparseAgree) {
  for (int c : {3, 7, 12}) {
    for (auto make : {&annihilation, &creation, &number}) {
      const Operator d = make(c, Storage::Dense);
      const Operator s = make(c, Storage::Sparse);
      EXPECT_FALSE(d.is_sparse());
      EXPECT_TRUE(s.is_sparse());
      EXPECT_LE((d.to_dense() - s.to_dense()).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
  const HilbertSpace sp({{"a", 3}, {"b", 4}});
  const Operator ed = embed(annihilation(4), "b", sp, Storage::Dense);
  const Operator es = embed(annihilation(4), "b", sp, Storage::Sparse);
  EXPECT_LE(ed.max_abs_diff(es), 1e-14);
}

TEST(Space, StorageThreshold) {
  EXPECT_FALSE(Operator::identity(HilbertSpace({{"a", 16}, {"b", 32}})).is_sparse());
  EXPECT_TRUE(Operator::identity(HilbertSpace({{"a", 16}, {"b", 33}})).is_sparse());
}

TEST(Space, RejectsBadFactors) {
  EXPECT_THROW(HilbertSpace({{"a", 0}}), InvalidDimensionError);
  EXPECT_THROW(HilbertSpace({{"a", 2}, {"a", 3}}), InvalidArgumentError);
  EXPECT_THROW(HilbertSpace({}), InvalidDimensionError);
}

TEST(Embed, IdentityAnywhere) {
  const HilbertSpace sp({{"k1", 3}, {"k2", 2}, {"c", 4}});
  for (const char* l : {"k1", "k2", "c"}) {
    const Operator id = embed(Operator::identity(HilbertSpace::single(sp.cutoff(l))), l, sp);
    EXPECT_LE(id.max_abs_diff(Operator::identity(sp)), 0.0);
  }
}

TEST(Embed, DisjointFactorsCommute) {
  const HilbertSpace sp({{"k1", 4}, {"k2", 5}});
  const Operator a = embed(annihilation(4), "k1", sp);
  const Operator b = embed(annihilation(5), "k2", sp);
  EXPECT_EQ((a * b - b * a).to_dense().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Embed, KroneckerSpectrum) {
  const HilbertSpace sp({{"x", 3}, {"y", 2}});
  const Operator n = embed(number(3), "x", sp);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(n.to_dense());
  const Eigen::VectorXd ev = es.eigenvalues();
  const double expect[] = {0, 0, 1, 1, 2, 2};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(ev(i), expect[i], 1e-14);
}

TEST(Embed, RowMajorLayout) {
  // index = i_x * 2 + i_y
  const HilbertSpace sp({{"x", 3}, {"y", 2}});
  const Operator ny = embed(number(2), "y", sp);
  const Operator nx = embed(number(3), "x", sp);
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(nx.element(i, i).real(), i / 2, 1e-15);
    EXPECT_NEAR(ny.element(i, i).real(), i % 2, 1e-15);
  }
}

TEST(Embed, RejectsWrongOperator) {
  const HilbertSpace sp({{"x", 3}, {"y", 2}});
  EXPECT_THROW(embed(number(4), "x", sp), InvalidDimensionError);
  EXPECT_THROW(embed(number(3), "z", sp), InvalidArgumentError);
}

TEST(Coherent, VacuumAtZero) {
  const Ket k = coherent_state(0.0, 6);
  EXPECT_NEAR(std::abs(k.amplitudes()(0)), 1.0, 1e-15);
  EXPECT_NEAR(k.amplitudes().tail(5).norm(), 0.0, 1e-15);
}

TEST(Coherent, PoissonMean) {
  const Ket k = coherent_state(2.0, 20);
  EXPECT_NEAR(expectation(number(20), k).real(), 4.0, 1e-6);
}

TEST(Coherent, GaussianOverlap) {
  const Ket p = coherent_state(2.0, 25);
  const Ket m = coherent_state(-2.0, 25);
  EXPECT_NEAR(std::abs(p.inner(m)), std::exp(-8.0), 1e-8);
}

TEST(Coherent, RefusesHeavyTruncation) {
  EXPECT_THROW(coherent_state(4.0, 6), TruncationLossError);
}

TEST(Displacement, IdentityAtZero) {
  EXPECT_LE(displacement(0.0, 8).max_abs_diff(Operator::identity(HilbertSpace::single(8))), 1e-15);
}

TEST(Displacement, ActsOnVacuum) {
  const Operator d = displacement(1.0, 20);
  const Vector v = d.apply(fock_state(0, 20).amplitudes());
  EXPECT_LE((v - coherent_state(1.0, 20).amplitudes()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Displacement, UnitaryOnLowerLevels) {
  const int c = 30;
  const DenseMatrix d = displacement(2.0, c).to_dense();
  const int keep = c * 6 / 10;
  const DenseMatrix dd = (d * d.adjoint()).topLeftCorner(keep, keep);
  EXPECT_LE((dd - DenseMatrix::Identity(keep, keep)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Expm, Zero) {
  const HilbertSpace sp = HilbertSpace::single(3);
  EXPECT_LE(expm(Operator::zero(sp)).max_abs_diff(Operator::identity(sp)), 1e-15);
}

TEST(Expm, DiagonalPhases) {
  DenseMatrix m = DenseMatrix::Zero(3, 3);
  const double th[] = {0.3, -1.2, 2.5};
  for (int i = 0; i < 3; ++i) m(i, i) = cplx(0.0, th[i]);
  const DenseMatrix e = expm(m);
  for (int i = 0; i < 3; ++i) EXPECT_LE(std::abs(e(i, i) - std::polar(1.0, th[i])), 1e-14);
}

TEST(Expm, PauliRotation) {
  DenseMatrix sx(2, 2);
  sx << 0, 1, 1, 0;
  const DenseMatrix e = expm(DenseMatrix(cplx(0.0, -M_PI / 2) * sx));
  EXPECT_LE((e - cplx(0.0, -1.0) * sx).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Expm, AntiHermitianIsUnitary) {
  std::mt19937 rng(7);
  std::normal_distribution<double> g;
  DenseMatrix h(12, 12);
  for (int i = 0; i < 12; ++i) {
    for (int j = 0; j < 12; ++j) h(i, j) = cplx(g(rng), g(rng));
  }
  h = (h + h.adjoint()).eval();
  const DenseMatrix u = expm(DenseMatrix(cplx(0.0, -1.0) * h));
  EXPECT_LE((u * u.adjoint() - DenseMatrix::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Expectation, Basics) {
  EXPECT_EQ(expectation(number(6), fock_state(0, 6)), cplx(0.0));
  const Ket a = coherent_state(cplx(1.0, 0.5), 24);
  EXPECT_NEAR(expectation(number(24), a).real(), 1.25, 1e-8);
  const DensityOperator rho = DensityOperator::pure(a);
  EXPECT_NEAR(expectation(Operator::identity(a.space()), rho).real(), 1.0, 1e-12);
}

TEST(Density, PureIsPositive) {
  const DensityOperator rho = DensityOperator::pure(coherent_state(1.0, 10));
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
  EXPECT_LE(rho.hermiticity_deviation(), 1e-15);
  EXPECT_GE(rho.min_eigenvalue(), -1e-12);
}

TEST(ProductState, Ordering) {
  const HilbertSpace sp({{"x", 3}, {"y", 2}});
  const Ket parts[] = {fock_state(2, 3), fock_state(1, 2)};
  const Ket k = product_state(sp, parts);
  EXPECT_NEAR(std::abs(k.amplitudes()(2 * 2 + 1)), 1.0, 1e-15);
}

}  // namespace
}  // namespace katsim
