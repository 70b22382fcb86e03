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

#include "katsim/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

namespace katsim {

namespace {

double bus_scale(const SystemParams& p) { return 2.0 * std::numbers::sqrt2 * p.J * p.alpha; }

double g_literal(const SystemParams& p, double t) {
  double s = 0.0;
  for (std::size_t n = 0; n < p.weights.size(); ++n) s += p.weights[n] * std::sin(static_cast<double>(n + 1) * p.zeta * t);
  return -bus_scale(p) * s;
}

void check(const SystemParams& p) {
  if (p.weights.empty()) throw InvalidArgumentError("pulse weights are empty");
  if (!(p.zeta > 0.0)) throw InvalidArgumentError("zeta must be positive");
}

}  // namespace

std::vector<double> shapira_weights(int N) {
  if (N < 1) throw InvalidArgumentError(fmt::format("shapira_weights: N = {} must be >= 1", N));
  const double n = N;
  // log c_N = -N log 2 + 0.5 [log 2 + 0.5 log pi + log N + lgamma(N+1) - lgamma(N+1/2)]
  const double log_c = -n * std::log(2.0) + 0.5 * (std::log(2.0) + 0.5 * std::log(std::numbers::pi) + std::log(n) +
                                                   std::lgamma(n + 1.0) - std::lgamma(n + 0.5));
  std::vector<double> r(static_cast<std::size_t>(N));
  for (int k = 1; k <= N; ++k) {
    const double log_binom = std::lgamma(n) - std::lgamma(static_cast<double>(k)) - std::lgamma(n - k + 1.0);
    const double sign = ((N - k) % 2 == 0) ? 1.0 : -1.0;
    r[static_cast<std::size_t>(k - 1)] = sign * std::exp(log_c + log_binom);
  }
  return r;
}

PulseSet make_pulse_set(int N, double zeta) {
  if (!(zeta > 0.0)) throw InvalidArgumentError("make_pulse_set: zeta must be positive");
  return PulseSet{N, shapira_weights(N), zeta, kTwoPi / zeta};
}

double weight_norm(const std::vector<double>& weights) {
  double s = 0.0;
  for (std::size_t n = 0; n < weights.size(); ++n) s += weights[n] * weights[n] / static_cast<double>(n + 1);
  return s;
}

TrajectoryPoint trajectory_fg(const SystemParams& params, double t) {
  check(params);
  const double c = bus_scale(params) / params.zeta;
  TrajectoryPoint pt;
  pt.t = t;
  for (std::size_t k = 0; k < params.weights.size(); ++k) {
    const double n = static_cast<double>(k + 1);
    pt.F += params.weights[k] / n * std::sin(n * params.zeta * t);
    pt.G += params.weights[k] / n * (std::cos(n * params.zeta * t) - 1.0);
  }
  pt.F *= c;
  pt.G *= c;
  return pt;
}

TrajectoryPoint trajectory(const SystemParams& params, double t) {
  TrajectoryPoint pt = trajectory_fg(params, t);
  if (t == 0.0) return pt;
  auto integrand = [&](double s) { return -trajectory_fg(params, s).F * g_literal(params, s); };
  // Split at every half period so each panel sees a smooth, low-order integrand.
  const double period = kTwoPi / params.zeta;
  const double lo = std::min(0.0, t);
  const double hi = std::max(0.0, t);
  const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / (0.5 * period) - 1e-12)));
  const double width = (hi - lo) / panels;
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    double err = 0.0;
    sum += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo + k * width,
                                                                           lo + (k + 1) * width, 15, 1e-13, &err);
  }
  pt.A = t >= 0.0 ? sum : -sum;
  return pt;
}

double accumulated_phase_closed_form(const SystemParams& params, double t) {
  check(params);
  // A = (c^2/zeta) sum_{n,m} (r_n r_m / n) int_0^t sin(n zeta s) sin(m zeta s) ds
  const double c = bus_scale(params);
  const double z = params.zeta;
  double sum = 0.0;
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    for (std::size_t j = 0; j < params.weights.size(); ++j) {
      const double a = static_cast<double>(i + 1) * z;
      const double b = static_cast<double>(j + 1) * z;
      double integral;
      if (i == j) {
        integral = 0.5 * t - std::sin(2.0 * a * t) / (4.0 * a);
      } else {
        integral = 0.5 * (std::sin((a - b) * t) / (a - b) - std::sin((a + b) * t) / (a + b));
      }
      sum += params.weights[i] * params.weights[j] / static_cast<double>(i + 1) * integral;
    }
  }
  return c * c / z * sum;
}

double closure_error(const SystemParams& params, double t) {
  const TrajectoryPoint pt = trajectory_fg(params, t);
  return std::hypot(pt.F, pt.G);
}

double gate_phase(const SystemParams& params) { return trajectory(params, kTwoPi / params.zeta).A; }

double gate_phase_analytic(const SystemParams& params) {
  check(params);
  const double ja = params.J * params.alpha;
  return 8.0 * std::numbers::pi * ja * ja / (params.zeta * params.zeta) * weight_norm(params.weights);
}

double max_bus_displacement(const SystemParams& params, int samples) {
  check(params);
  if (samples < 2) throw InvalidArgumentError("max_bus_displacement: need at least 2 samples");
  const double period = kTwoPi / params.zeta;
  double best = 0.0;
  for (int k = 0; k < samples; ++k) {
    best = std::max(best, closure_error(params, period * k / samples));
  }
  return best / std::numbers::sqrt2;
}

}  // namespace katsim
