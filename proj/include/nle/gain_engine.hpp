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

#ifndef NLE_GAIN_ENGINE_HPP
#define NLE_GAIN_ENGINE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "nle/filterbank.hpp"
#include "nle/stft.hpp"

namespace nle {

/// Pipeline configuration. The defaults give the 16 kHz, 32 ms / 50% overlap
/// framing with 30 gammatone bands between 150 and 8000 Hz, a target
/// intelligibility of 0.7 and a 100 dB_SPL per-band power cap under the
/// convention that an RMS-1 digital signal sits at 100 dB_SPL.
struct NleConfig {
  double target_asii{0.7};
  std::vector<double> band_importance{};  // empty selects uniform 1/J
  double max_band_power_dbspl{100.0};
  double reference_power{1e-10};  // digital power corresponding to 0 dB_SPL

  std::size_t num_bands{30};
  double band_f_lo_hz{150.0};
  double band_f_hi_hz{8000.0};
  std::size_t window_length{512};
  std::size_t hop{256};
  std::size_t fft_size{512};
  double sample_rate_hz{16000.0};

  double max_band_power() const {
    return reference_power * std::pow(10.0, max_band_power_dbspl / 10.0);
  }

  StftParams stft_params() const {
    return make_hann_params(window_length, hop, fft_size);
  }

  /// Band importance as configured, or uniform 1/J when left empty.
  std::vector<double> importance() const {
    if (band_importance.empty()) {
      return std::vector<double>(num_bands, 1.0 / static_cast<double>(num_bands));
    }
    return band_importance;
  }

  void validate() const {
    if (!(target_asii >= 0.0) || target_asii >= 1.0) {
      throw std::invalid_argument("config: target_asii must be in [0, 1)");
    }
    if (!band_importance.empty()) {
      if (band_importance.size() != num_bands) {
        throw std::invalid_argument("config: band_importance length != num_bands");
      }
      double total = 0.0;
      for (double g : band_importance) {
        if (!(g >= 0.0)) {
          throw std::invalid_argument("config: band_importance must be >= 0");
        }
        total += g;
      }
      if (!(total > 0.0)) {
        throw std::invalid_argument("config: band_importance must not be all zero");
      }
    }
    if (num_bands == 0) throw std::invalid_argument("config: num_bands must be >= 1");
    if (!(reference_power > 0.0) || !(max_band_power() > 0.0)) {
      throw std::invalid_argument("config: power convention must be positive");
    }
  }
};

/// Per-band audibility targets and the equivalent minimum processed SNRs.
struct BandTargets {
  std::vector<double> audibility;  // I_j
  std::vector<double> snr_limits;  // I_j / (1 - I_j)
};

/// Every stage of the gain rule, kept for diagnostics and post-hoc checks.
/// Band gains are stored once per band: within a band the optimal gain is
/// the same for every bin, so a single value fully describes it.
struct GainPlan {
  std::vector<double> speech_bin_power;   // calibrated per-bin long-term power
  std::vector<double> noise_bin_power;
  std::vector<double> speech_band_power;  // sigma^2_S,j
  std::vector<double> noise_band_power;   // sigma^2_N,j
  BandTargets targets;
  std::vector<double> band_gains;         // v_j before limiting, >= 1
  std::vector<double> limited_gains;      // min(v_j, v_j,max)
  std::vector<double> bin_gains;          // v_k after projection
  std::vector<std::uint8_t> limiter_active;
  std::vector<std::uint8_t> infeasible;   // no speech power but a positive target
  std::vector<double> processed_band_power;  // limited^2 * speech band power
  std::vector<double> per_band_snr;          // processed / noise band power

  std::size_t limiter_active_count() const {
    std::size_t n = 0;
    for (auto f : limiter_active) n += f;
    return n;
  }
  std::size_t infeasible_count() const {
    std::size_t n = 0;
    for (auto f : infeasible) n += f;
    return n;
  }
};

/// Long-term per-bin power: the mean of |S_{k,i}|^2 across all frames.
inline std::vector<double> long_term_power(const Spectrogram& spec) {
  if (spec.frames == 0 || spec.bins == 0) {
    throw std::invalid_argument("long_term_power: empty spectrogram");
  }
  std::vector<double> power(spec.bins, 0.0);
  for (std::size_t i = 0; i < spec.frames; ++i) {
    for (std::size_t k = 0; k < spec.bins; ++k) {
      power[k] += std::norm(spec.coeffs[i * spec.bins + k]);
    }
  }
  const double inv_frames = 1.0 / static_cast<double>(spec.frames);
  for (auto& p : power) p *= inv_frames;
  return power;
}

/// Long-term bin power scaled onto the per-sample signal power axis:
/// conjugate-pair bins are counted twice and the raw DFT powers are divided
/// by fft_size * sum(window^2), so the powers sum to (approximately) the
/// mean-square amplitude of the signal. On this axis an RMS-1 signal carries
/// total power 1, which is what the dB_SPL cap convention expects.
inline std::vector<double> calibrated_bin_power(const Spectrogram& spec) {
  std::vector<double> power = long_term_power(spec);
  const double scale = 1.0 / (static_cast<double>(spec.params.fft_size) *
                              window_energy(spec.params));
  for (std::size_t k = 0; k < power.size(); ++k) {
    power[k] *= one_sided_weight(k, power.size()) * scale;
  }
  return power;
}

/// Importance-weighted per-band audibility limits: I_j = A* g_j / sum_i g_i^2.
/// By construction sum_j g_j I_j = A*, which is what makes the processed
/// score meet the total target.
inline std::vector<double> weight_audibility_limits(double target_asii,
                                                    std::span<const double> gamma) {
  if (!(target_asii >= 0.0) || target_asii >= 1.0) {
    throw std::invalid_argument("weight_audibility_limits: target must be in [0, 1)");
  }
  double sum_sq = 0.0;
  for (double g : gamma) {
    if (!(g >= 0.0)) {
      throw std::invalid_argument("weight_audibility_limits: negative importance");
    }
    sum_sq += g * g;
  }
  if (!(sum_sq > 0.0)) {
    throw std::invalid_argument("weight_audibility_limits: importance all zero");
  }
  std::vector<double> limits(gamma.size());
  for (std::size_t j = 0; j < gamma.size(); ++j) {
    limits[j] = target_asii * gamma[j] / sum_sq;
    if (limits[j] >= 1.0) {
      throw std::invalid_argument(
          "weight_audibility_limits: infeasible per-band target (I_j >= 1)");
    }
  }
  return limits;
}

/// Audibility limit expressed as a minimum processed subband SNR.
inline double snr_limit(double audibility) {
  if (!(audibility >= 0.0) || audibility >= 1.0) {
    throw std::invalid_argument("snr_limit: audibility must be in [0, 1)");
  }
  return audibility / (1.0 - audibility);
}

struct OptimalGains {
  std::vector<double> gains;
  std::vector<std::uint8_t> infeasible;
};

/// Closed-form minimum processing gain per band: 1 when the unprocessed band
/// already meets its SNR limit, otherwise exactly the amplification that
/// makes the processed band SNR hit the limit. A band with no speech power
/// but a positive target cannot be amplified into compliance; it keeps gain
/// 1 and is flagged instead.
inline OptimalGains optimal_gains(std::span<const double> speech_band_power,
                                  std::span<const double> noise_band_power,
                                  std::span<const double> snr_limits) {
  const std::size_t bands = speech_band_power.size();
  if (noise_band_power.size() != bands || snr_limits.size() != bands) {
    throw std::invalid_argument("optimal_gains: dimension mismatch");
  }
  OptimalGains out;
  out.gains.assign(bands, 1.0);
  out.infeasible.assign(bands, 0);
  for (std::size_t j = 0; j < bands; ++j) {
    const double s = speech_band_power[j];
    const double required = noise_band_power[j] * snr_limits[j];
    if (!(s >= 0.0) || !(noise_band_power[j] >= 0.0) || !(snr_limits[j] >= 0.0)) {
      throw std::invalid_argument("optimal_gains: negative input");
    }
    if (s >= required) continue;  // already intelligible enough
    if (s == 0.0) {
      out.infeasible[j] = 1;      // nothing to amplify
      continue;
    }
    out.gains[j] = std::sqrt(required / s);
  }
  return out;
}

/// Sound-level limit: cap the band gain so the processed band power does not
/// exceed max_band_power. A silent band has no finite cap.
inline double limit_gain(double band_gain, double speech_band_power,
                         double max_band_power) {
  if (!(max_band_power > 0.0)) {
    throw std::invalid_argument("limit_gain: max band power must be positive");
  }
  if (speech_band_power <= 0.0) return band_gain;
  const double v_max = std::sqrt(max_band_power / speech_band_power);
  return band_gain < v_max ? band_gain : v_max;
}

/// Project per-band gains onto bins: v_k = sqrt(sum_j omega[j,k] * v_j^2).
/// When every contributing band gain is exactly 1 the bin gain is set to
/// exactly 1, keeping the no-processing path bit-transparent.
inline std::vector<double> project_gains_to_bins(std::span<const double> band_gains,
                                                 const SubbandWeights& weights) {
  if (band_gains.size() != weights.bands) {
    throw std::invalid_argument("project_gains_to_bins: dimension mismatch");
  }
  std::vector<double> bin_gains(weights.bins);
  for (std::size_t k = 0; k < weights.bins; ++k) {
    double acc = 0.0;
    bool all_unity = true;
    for (std::size_t j = 0; j < weights.bands; ++j) {
      const double w = weights.omega[j * weights.bins + k];
      if (w > 0.0 && band_gains[j] != 1.0) all_unity = false;
      acc += w * band_gains[j] * band_gains[j];
    }
    bin_gains[k] = all_unity ? 1.0 : std::sqrt(acc);
  }
  return bin_gains;
}

/// The full gain rule: long-term statistics, subband filtering, audibility
/// weighting, SNR limits, closed-form per-band gains, sound-level limiting
/// and projection back to bins. The returned bin gains apply unchanged to
/// every frame; all intermediate stages are returned for inspection.
inline GainPlan plan_gains(const Spectrogram& speech, const Spectrogram& noise,
                           const NleConfig& config, const SubbandWeights& weights) {
  config.validate();
  const StftParams& sp = speech.params;
  const StftParams& np = noise.params;
  if (sp.window_length != np.window_length || sp.hop != np.hop ||
      sp.fft_size != np.fft_size || speech.bins != noise.bins) {
    throw std::invalid_argument("plan_gains: speech/noise STFT params differ");
  }
  if (weights.bins != speech.bins) {
    throw std::invalid_argument("plan_gains: weights do not match STFT bins");
  }
  if (weights.bands != config.num_bands) {
    throw std::invalid_argument("plan_gains: weights do not match num_bands");
  }

  GainPlan plan;
  plan.speech_bin_power = calibrated_bin_power(speech);
  plan.noise_bin_power = calibrated_bin_power(noise);
  plan.speech_band_power = band_power(plan.speech_bin_power, weights);
  plan.noise_band_power = band_power(plan.noise_bin_power, weights);

  const std::vector<double> gamma = config.importance();
  plan.targets.audibility = weight_audibility_limits(config.target_asii, gamma);
  plan.targets.snr_limits.resize(gamma.size());
  for (std::size_t j = 0; j < gamma.size(); ++j) {
    plan.targets.snr_limits[j] = snr_limit(plan.targets.audibility[j]);
  }

  OptimalGains opt = optimal_gains(plan.speech_band_power, plan.noise_band_power,
                                   plan.targets.snr_limits);
  plan.band_gains = std::move(opt.gains);
  plan.infeasible = std::move(opt.infeasible);

  const double p_max = config.max_band_power();
  plan.limited_gains.resize(plan.band_gains.size());
  plan.limiter_active.assign(plan.band_gains.size(), 0);
  for (std::size_t j = 0; j < plan.band_gains.size(); ++j) {
    plan.limited_gains[j] =
        limit_gain(plan.band_gains[j], plan.speech_band_power[j], p_max);
    plan.limiter_active[j] = plan.limited_gains[j] < plan.band_gains[j] ? 1 : 0;
  }

  plan.bin_gains = project_gains_to_bins(plan.limited_gains, weights);

  plan.processed_band_power.resize(plan.band_gains.size());
  plan.per_band_snr.resize(plan.band_gains.size());
  for (std::size_t j = 0; j < plan.band_gains.size(); ++j) {
    plan.processed_band_power[j] =
        plan.limited_gains[j] * plan.limited_gains[j] * plan.speech_band_power[j];
    const double n = plan.noise_band_power[j];
    plan.per_band_snr[j] =
        n > 0.0 ? plan.processed_band_power[j] / n
                : std::numeric_limits<double>::infinity();
  }
  return plan;
}

}  // namespace nle

#endif  // NLE_GAIN_ENGINE_HPP
