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

#include "katsim/hamiltonians.hpp"

namespace katsim {

struct PulseSet {
  int N = 1;
  std::vector<double> weights{1.0};
  double zeta = 0.0;
  double tau = 0.0;  // 2 pi / zeta
};

/// Binomial composite-tone weights
///   r_n = (-1)^{N-n} c_N binom(N-1, n-1),
///   c_N = 2^{-N} sqrt(2 sqrt(pi) N N! / Gamma(N + 1/2)),
/// normalized so that sum_n r_n^2 / n = 1 for every N >= 1 (r_1 = 1 at N = 1).
/// Evaluated in log-Gamma form.
std::vector<double> shapira_weights(int N);

PulseSet make_pulse_set(int N, double zeta);

/// sum_n r_n^2 / n
double weight_norm(const std::vector<double>& weights);

struct TrajectoryPoint {
  double t = 0.0;
  double F = 0.0;
  double G = 0.0;
  double A = 0.0;
};

/// Phase-space displacement of the bus, with c = 2 sqrt(2) J alpha:
///   F(t) = (c/zeta) sum (r_n/n) sin(n zeta t)
///   G(t) = (c/zeta) sum (r_n/n) [cos(n zeta t) - 1]
///   A(t) = -int_0^t F(t') g(t') dt',  g(t) = -c sum r_n sin(n zeta t)
/// A is integrated by adaptive Gauss-Kronrod quadrature to 1e-10 absolute.
TrajectoryPoint trajectory(const SystemParams& params, double t);

/// F and G only (no quadrature).
TrajectoryPoint trajectory_fg(const SystemParams& params, double t);

/// Closed form of A(t) from term-by-term integration; cross-check for `trajectory`.
double accumulated_phase_closed_form(const SystemParams& params, double t);

/// sqrt(F^2 + G^2)
double closure_error(const SystemParams& params, double t);

/// A(tau) by quadrature.
double gate_phase(const SystemParams& params);
/// 8 pi J^2 alpha^2 / zeta^2 * sum r_n^2 / n
double gate_phase_analytic(const SystemParams& params);

/// Largest coherent amplitude max_t sqrt(F^2 + G^2) / sqrt(2) the bus reaches over one period.
double max_bus_displacement(const SystemParams& params, int samples = 2048);

}  // namespace katsim
