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

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "katsim/cat_space.hpp"
#include "katsim/hamiltonians.hpp"

namespace katsim {
namespace {

constexpr int kWide = 40;  // generous cutoff so truncation stays far below test tolerances

// D[L] rho
DenseMatrix dissipate(const DenseMatrix& l, const DenseMatrix& rho) {
  const DenseMatrix ll = l.adjoint() * l;
  return l * rho * l.adjoint() - 0.5 * (ll * rho + rho * ll);
}

TEST(Cat, EvenCatAtZeroIsVacuum) {
  const Ket c = cat_state(0.0, CatSign::Plus, 5);
  EXPECT_NEAR(std::abs(c.amplitudes()(0)), 1.0, 1e-15);
  EXPECT_THROW(cat_state(0.0, CatSign::Minus, 5), DegenerateStateError);
}

TEST(Cat, ParityOrthogonal) {
  const CatBasis b(2.0, 18, 0);
  EXPECT_LE(std::abs(b.plus().inner(b.minus())), 1e-15);
}

TEST(Cat, NormalizationClosedForm) {
  const CatBasis b(2.0, kWide, 0);
  const double x = std::exp(-8.0);
  EXPECT_NEAR(b.cat_norm(CatSign::Plus), 1.0 / std::sqrt(2.0 * (1.0 + x)), 1e-15);
  // overlap with the normalized coherent state fixes N_+: <alpha|C+> = N_+ (1 + e^{-2 alpha^2})
  const Ket a = coherent_state(2.0, kWide);
  EXPECT_NEAR(std::abs(a.inner(b.plus())), b.cat_norm(CatSign::Plus) * (1.0 + x), 1e-12);
  EXPECT_NEAR(std::abs(a.inner(b.minus())), b.cat_norm(CatSign::Minus) * (1.0 - x), 1e-12);
}

TEST(Cat, FlipRelation) {
  const double alpha = 2.0;
  const CatBasis b(alpha, kWide, 0);
  const Operator a = annihilation(kWide);
  const double t = std::tanh(alpha * alpha);
  const Vector ap = a.apply(b.plus().amplitudes());
  const Vector am = a.apply(b.minus().amplitudes());
  EXPECT_LE((ap - alpha * std::sqrt(t) * b.minus().amplitudes()).norm(), 1e-10);
  EXPECT_LE((am - alpha / std::sqrt(t) * b.plus().amplitudes()).norm(), 1e-10);
}

TEST(Cat, DefaultCutoff) {
  EXPECT_EQ(default_kpo_cutoff(2.0), 18);
  EXPECT_EQ(default_kpo_cutoff(3.0), 28);
  EXPECT_EQ(default_kpo_cutoff(0.0), 4);
}

TEST(Excited, OrthogonalToCats) {
  const CatBasis b(2.0, kWide, 1);
  for (CatSign s : {CatSign::Plus, CatSign::Minus}) {
    const Ket& e = b.excited(s, 1);
    EXPECT_NEAR(e.norm(), 1.0, 1e-14);
    EXPECT_LE(std::abs(e.inner(b.plus())), 1e-8);
    EXPECT_LE(std::abs(e.inner(b.minus())), 1e-8);
  }
}

TEST(Excited, GapWithinTenPercent) {
  const double K = mhz(20.0);
  const double alpha = 2.0;
  const DenseMatrix h = single_kerr_hamiltonian(K, K * alpha * alpha, kWide).to_dense();
  const CatBasis b(alpha, kWide, 1);
  const double gap = energy_gap(K, alpha);
  for (CatSign s : {CatSign::Plus, CatSign::Minus}) {
    const Vector& g = b.cat(s).amplitudes();
    const Vector& e = b.excited(s, 1).amplitudes();
    // H_Kerr is written with the cat manifold on top of the spectrum
    const double de = g.dot(h * g).real() - e.dot(h * e).real();
    EXPECT_NEAR(de / gap, 1.0, 0.10);
  }
}

TEST(Excited, ParityEigenstates) {
  const CatBasis b(2.0, kWide, 2);
  Vector parity(kWide);
  for (int n = 0; n < kWide; ++n) parity(n) = (n % 2 == 0) ? 1.0 : -1.0;
  for (int v = 1; v <= 2; ++v) {
    for (CatSign s : {CatSign::Plus, CatSign::Minus}) {
      const Vector& e = b.excited(s, v).amplitudes();
      const Vector pe = parity.cwiseProduct(e);
      EXPECT_LE(std::min((pe - e).norm(), (pe + e).norm()), 1e-8);
    }
  }
}

TEST(Excited, ExactDiagonalizationGap) {
  // First excitation above the degenerate cat pair, from the exact spectrum.
  // It sits 18% below the 4 K alpha^2 estimate at alpha = 2; value frozen here.
  const double K = mhz(20.0);
  const double alpha = 2.0;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(single_kerr_hamiltonian(K, K * alpha * alpha, kWide).to_dense());
  const Eigen::VectorXd e = es.eigenvalues();
  const Eigen::Index n = e.size();
  EXPECT_NEAR(e(n - 1), e(n - 2), 1e-6 * K);
  EXPECT_NEAR(e(n - 1) / (K * 16.0), 1.0, 1e-9);
  EXPECT_NEAR((e(n - 1) - e(n - 3)) / energy_gap(K, alpha), 0.8181749526, 1e-8);
}

TEST(Projector, Idempotent) {
  for (int vmax : {0, 1, 2}) {
    const Operator p = cat_projector(2.0, vmax, kWide);
    const DenseMatrix m = p.to_dense();
    EXPECT_LE((m * m - m).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(p.trace().real(), 2.0 + 2.0 * vmax, 1e-8);
  }
}

TEST(Projector, ProjectedLoweringSingularValues) {
  const double alpha = 2.0;
  const CatBasis b(alpha, kWide, 0);
  const DenseMatrix a = annihilation(kWide).to_dense();
  DenseMatrix v(kWide, 2);
  v.col(0) = b.plus().amplitudes();
  v.col(1) = b.minus().amplitudes();
  const DenseMatrix block = v.adjoint() * a * v;
  Eigen::JacobiSVD<DenseMatrix> svd(block);
  const Eigen::VectorXd sv = svd.singularValues();
  const double t = std::tanh(alpha * alpha);
  EXPECT_NEAR(sv(0), alpha / std::sqrt(t), 1e-8);
  EXPECT_NEAR(sv(1), alpha * std::sqrt(t), 1e-8);
}

TEST(Paulis, Algebra) {
  const CatBasis b(2.0, 24);
  const CatPauliSet p = b.paulis();
  const DenseMatrix x = p.sx.to_dense(), y = p.sy.to_dense(), z = p.sz.to_dense();
  EXPECT_LE((x * y - y * x - cplx(0.0, 2.0) * z).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE(p.sy.hermiticity_deviation(), 1e-15);
  EXPECT_LE((p.sp.to_dense() - 0.5 * (x - cplx(0.0, 1.0) * y)).cwiseAbs().maxCoeff(), 1e-14);

  const CatPauliSet q = qubit_paulis();
  const DenseMatrix qx = q.sx.to_dense(), qy = q.sy.to_dense(), qz = q.sz.to_dense();
  EXPECT_LE((qx * qy - qy * qx - cplx(0.0, 2.0) * qz).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Paulis, CollectiveSx) {
  const CatBasis b(2.0, 18, 0);
  const HilbertSpace sp({{"k1", 18}, {"k2", 18}});
  const Operator sx = collective_sx(b, sp);
  const Ket parts[] = {b.plus(), b.plus()};
  const Ket pp = product_state(sp, parts);
  // Sx |++> = (|-+> + |+->)/2, so <Sx^2> = 1/2
  const Vector y = sx.apply(pp.amplitudes());
  EXPECT_NEAR(y.squaredNorm(), 0.5, 1e-12);
  EXPECT_NEAR(std::abs(pp.amplitudes().dot(y)), 0.0, 1e-12);
}

TEST(LossJump, LargeAlphaLimit) {
  const double alpha = 5.0;
  const DenseMatrix l = effective_loss_jump(alpha).to_dense();
  const DenseMatrix x = qubit_paulis().sx.to_dense();
  EXPECT_LE((l - alpha * x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LossJump, PhaseFlipWeight) {
  const double alpha = 2.0;
  const DenseMatrix l = effective_loss_jump(alpha).to_dense();
  const double scale = alpha / std::pow(1.0 - std::exp(-16.0), 0.25);
  // sigma_x + i e^{-8} sigma_y: entry (C+, C-) = 1 + e^{-8}, entry (C-, C+) = 1 - e^{-8}
  EXPECT_NEAR(l(0, 1).real() / scale - 1.0, std::exp(-8.0), 1e-15);
  EXPECT_NEAR(1.0 - l(1, 0).real() / scale, std::exp(-8.0), 1e-15);
  EXPECT_NEAR(std::exp(-8.0), 3.35e-4, 1e-6);
}

TEST(LossJump, MatchesProjectedDissipator) {
  const double alpha = 2.0;
  const CatBasis b(alpha, kWide, 0);
  DenseMatrix v(kWide, 2);
  v.col(0) = b.plus().amplitudes();
  v.col(1) = b.minus().amplitudes();
  const DenseMatrix pap = v.adjoint() * annihilation(kWide).to_dense() * v;
  const DenseMatrix l = effective_loss_jump(alpha).to_dense();
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      DenseMatrix e = DenseMatrix::Zero(2, 2);
      e(i, j) = 1.0;
      worst = std::max(worst, (dissipate(l, e) - dissipate(pap, e)).cwiseAbs().maxCoeff());
    }
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Gap, Values) {
  EXPECT_NEAR(energy_gap(mhz(20.0), 2.0) / mhz(320.0), 1.0, 1e-14);
  EXPECT_EQ(energy_gap(mhz(20.0), 0.0), 0.0);
  EXPECT_THROW(energy_gap(0.0, 2.0), InvalidArgumentError);
}

TEST(Kerr, CatsAreDegenerateEigenstates) {
  const double K = mhz(20.0);
  const double alpha = 2.0;
  const Operator h = single_kerr_hamiltonian(K, K * alpha * alpha, kWide);
  const CatBasis b(alpha, kWide, 0);
  const double e0 = K * std::pow(alpha, 4);
  for (CatSign s : {CatSign::Plus, CatSign::Minus}) {
    const Vector& c = b.cat(s).amplitudes();
    EXPECT_LE((h.apply(c) - e0 * c).norm() / K, 1e-6);
  }
}

}  // namespace
}  // namespace katsim
