// Copyright 2026 The nle-minproc Authors. All Rights Reserved.
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
//
// Independent numeric solver for the per-band constrained gain problem:
//
//   minimize    sum_k w_k (1 - v_k)^2 s_k
//   subject to  sum_k w_k v_k^2 s_k >= n * t,   v_k >= 1
//
// Used to cross-check the closed-form gain rule without trusting it: the
// multiplier search only relies on the stationarity relation
// v_k = max(1, 1/(1 - lambda)) and on the monotonicity of the constraint
// residual in lambda. A brute-force grid search over tiny bands provides a
// second, formula-free check.

#ifndef NLE_ORACLE_HPP
#define NLE_ORACLE_HPP

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

namespace nle::oracle {

/// One subband's data: per-bin weights and speech powers, the noise band
/// power and the required minimum processed SNR.
struct BandInstance {
  std::vector<double> weights;        // w_k >= 0
  std::vector<double> speech_powers;  // s_k >= 0, per bin
  double noise_band_power{0.0};       // n
  double snr_target{0.0};             // t
};

inline double penalty(const BandInstance& inst, const std::vector<double>& gains) {
  double d = 0.0;
  for (std::size_t k = 0; k < gains.size(); ++k) {
    const double e = 1.0 - gains[k];
    d += inst.weights[k] * e * e * inst.speech_powers[k];
  }
  return d;
}

inline double constraint_lhs(const BandInstance& inst,
                             const std::vector<double>& gains) {
  double p = 0.0;
  for (std::size_t k = 0; k < gains.size(); ++k) {
    p += inst.weights[k] * gains[k] * gains[k] * inst.speech_powers[k];
  }
  return p;
}

inline void validate(const BandInstance& inst) {
  if (inst.weights.size() != inst.speech_powers.size() || inst.weights.empty()) {
    throw std::invalid_argument("oracle: malformed band instance");
  }
  for (std::size_t k = 0; k < inst.weights.size(); ++k) {
    if (!(inst.weights[k] >= 0.0) || !(inst.speech_powers[k] >= 0.0)) {
      throw std::invalid_argument("oracle: negative weight or power");
    }
  }
  if (!(inst.noise_band_power >= 0.0) || !(inst.snr_target >= 0.0)) {
    throw std::invalid_argument("oracle: negative noise power or target");
  }
}

/// Bisection on the Lagrange multiplier. Each candidate lambda produces the
/// per-bin gains via the stationarity relation (evaluated bin by bin; equal
/// gains are an outcome, not an assumption) and the residual of the SNR
/// constraint steers the bracket. lambda lives in (0, 1) in the active case.
/// rel_tol is a relative tolerance on the gains; since v = 1/(1 - lambda),
/// the stop rule compares the bracket width against 1 - lambda.
inline std::vector<double> solve_numeric(const BandInstance& inst,
                                         double rel_tol = 1e-10,
                                         int max_iters = 200) {
  validate(inst);
  const std::size_t bins = inst.weights.size();
  const double required = inst.noise_band_power * inst.snr_target;

  const auto gains_at = [&](double lambda) {
    std::vector<double> v(bins);
    for (std::size_t k = 0; k < bins; ++k) {
      v[k] = std::max(1.0, 1.0 / (1.0 - lambda));
    }
    return v;
  };

  // No processing first: if unit gains already satisfy the constraint the
  // MSE minimum is trivially v = 1.
  std::vector<double> unit(bins, 1.0);
  if (constraint_lhs(inst, unit) >= required) return unit;

  constexpr double kEps = 1e-12;
  double lo = 0.0;
  double hi = 1.0 - kEps;
  if (constraint_lhs(inst, gains_at(hi)) < required) {
    throw std::invalid_argument("oracle: infeasible band instance");
  }
  for (int it = 0; it < max_iters; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double lhs = constraint_lhs(inst, gains_at(mid));
    if (lhs >= required) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (hi - lo <= rel_tol * (1.0 - hi)) break;
  }
  return gains_at(hi);
}

struct GridCheckResult {
  std::vector<double> best_gains;
  double best_penalty{0.0};
  bool feasible_found{false};
  bool boundary_hit{false};
  double grid_step{0.0};
};

/// Exhaustive search over a uniform gain grid on [1, v_hi]^|B|. Only for
/// bands of up to three bins; the result is the cheapest feasible grid
/// point. boundary_hit reports a best point pinned to the top of the grid
/// (or no feasible point at all), meaning v_hi was chosen too small.
inline GridCheckResult grid_check(const BandInstance& inst,
                                  std::size_t points_per_axis, double v_hi) {
  validate(inst);
  const std::size_t bins = inst.weights.size();
  if (bins > 3) {
    throw std::invalid_argument("oracle: band too large for exhaustive search");
  }
  if (points_per_axis < 2 || !(v_hi > 1.0)) {
    throw std::invalid_argument("oracle: bad grid");
  }
  const double required = inst.noise_band_power * inst.snr_target;
  const double step = (v_hi - 1.0) / static_cast<double>(points_per_axis - 1);

  GridCheckResult res;
  res.grid_step = step;
  std::vector<std::size_t> idx(bins, 0);
  std::vector<double> gains(bins, 1.0);
  while (true) {
    for (std::size_t k = 0; k < bins; ++k) {
      gains[k] = 1.0 + step * static_cast<double>(idx[k]);
    }
    if (constraint_lhs(inst, gains) >= required) {
      const double d = penalty(inst, gains);
      if (!res.feasible_found || d < res.best_penalty) {
        res.feasible_found = true;
        res.best_penalty = d;
        res.best_gains = gains;
      }
    }
    std::size_t carry = 0;
    while (carry < bins && ++idx[carry] == points_per_axis) {
      idx[carry] = 0;
      ++carry;
    }
    if (carry == bins) break;
  }
  if (!res.feasible_found) {
    res.boundary_hit = true;
  } else {
    for (double g : res.best_gains) {
      if (g >= v_hi - 0.5 * step) res.boundary_hit = true;
    }
  }
  return res;
}

/// Random feasible instances stressing both branch cases: log-uniform powers
/// across six orders of magnitude, band sizes 1-8, SNR targets log-uniform
/// in [1e-3, 1e3].
inline BandInstance random_band_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> size_dist(1, 8);
  std::uniform_real_distribution<double> log_power(-3.0, 3.0);
  std::uniform_real_distribution<double> log_target(-3.0, 3.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  BandInstance inst;
  const std::size_t bins = size_dist(rng);
  inst.weights.resize(bins);
  inst.speech_powers.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    inst.weights[k] = 0.05 + unit(rng);
    inst.speech_powers[k] = std::pow(10.0, log_power(rng));
  }
  inst.noise_band_power = std::pow(10.0, log_power(rng));
  inst.snr_target = std::pow(10.0, log_target(rng));
  return inst;
}

}  // namespace nle::oracle

#endif  // NLE_ORACLE_HPP
