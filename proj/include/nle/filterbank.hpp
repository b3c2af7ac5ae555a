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

#ifndef NLE_FILTERBANK_HPP
#define NLE_FILTERBANK_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace nle {

/// ERB-rate scale (Glasberg & Moore): maps frequency to auditory filter index.
inline double erb_rate(double f_hz) {
  return 21.4 * std::log10(4.37e-3 * f_hz + 1.0);
}

inline double erb_rate_inverse(double rate) {
  return (std::pow(10.0, rate / 21.4) - 1.0) / 4.37e-3;
}

/// Equivalent rectangular bandwidth of the auditory filter centered at f_hz.
inline double erb_bandwidth(double f_hz) {
  return 24.7 * (4.37e-3 * f_hz + 1.0);
}

struct BandLayout {
  std::vector<double> center_freqs;
  std::vector<double> erb_bandwidths;

  std::size_t size() const { return center_freqs.size(); }
};

/// Non-negative bin-to-band weights, band-major (omega[j * bins + k]).
/// Columns sum to one so total power is preserved between domains.
struct SubbandWeights {
  std::vector<double> omega;
  std::size_t bands{0};
  std::size_t bins{0};
  BandLayout layout;

  double at(std::size_t j, std::size_t k) const { return omega[j * bins + k]; }
};

/// Band centers linearly spaced on the ERB-rate scale between f_lo and f_hi,
/// endpoints included.
inline BandLayout erb_layout(std::size_t num_bands, double f_lo_hz, double f_hi_hz) {
  if (num_bands < 1 || !(f_lo_hz > 0.0) || !(f_hi_hz > f_lo_hz)) {
    throw std::invalid_argument("erb_layout: invalid band range");
  }
  const double r_lo = erb_rate(f_lo_hz);
  const double r_hi = erb_rate(f_hi_hz);
  BandLayout layout;
  layout.center_freqs.resize(num_bands);
  layout.erb_bandwidths.resize(num_bands);
  for (std::size_t j = 0; j < num_bands; ++j) {
    const double t = num_bands == 1
                         ? 0.0
                         : static_cast<double>(j) / static_cast<double>(num_bands - 1);
    // Pin the endpoints; the rate round-trip can drift by a few ulp.
    double fc = erb_rate_inverse(r_lo + t * (r_hi - r_lo));
    if (j == 0) fc = f_lo_hz;
    if (j + 1 == num_bands && num_bands > 1) fc = f_hi_hz;
    layout.center_freqs[j] = fc;
    layout.erb_bandwidths[j] = erb_bandwidth(fc);
  }
  return layout;
}

// Fourth-order gammatone squared magnitude, symmetric approximation. The
// bandwidth constant places the -3 dB width at one ERB.
inline double gammatone_power_response(double f_hz, double center_hz,
                                       double erb_hz) {
  static const double kBandwidthScale =
      1.0 / (2.0 * std::sqrt(std::pow(2.0, 0.25) - 1.0));
  const double u = (f_hz - center_hz) / (kBandwidthScale * erb_hz);
  const double base = 1.0 + u * u;
  return 1.0 / (base * base * base * base);
}

/// Gammatone responses sampled on the STFT bin grid and normalized per bin
/// so every column of omega sums to one.
inline SubbandWeights gammatone_weights(const BandLayout& layout,
                                        std::size_t bins, double sample_rate) {
  if (bins == 0) throw std::invalid_argument("gammatone_weights: empty bin grid");
  if (layout.size() == 0) {
    throw std::invalid_argument("gammatone_weights: empty layout");
  }
  const double nyquist = sample_rate / 2.0;
  for (std::size_t j = 0; j < layout.size(); ++j) {
    if (!(layout.center_freqs[j] > 0.0) || layout.center_freqs[j] > nyquist) {
      throw std::invalid_argument(
          "gammatone_weights: center frequency outside (0, nyquist]");
    }
    if (j > 0 && !(layout.center_freqs[j] > layout.center_freqs[j - 1])) {
      throw std::invalid_argument(
          "gammatone_weights: center frequencies must be strictly increasing");
    }
  }

  SubbandWeights w;
  w.bands = layout.size();
  w.bins = bins;
  w.layout = layout;
  w.omega.resize(w.bands * bins);

  // 0 Hz and every other bin go through the same formula; normalization
  // assigns them fully to whichever bands respond most.
  const double bin_hz = nyquist / static_cast<double>(bins - 1);
  for (std::size_t k = 0; k < bins; ++k) {
    const double f = static_cast<double>(k) * bin_hz;
    double col_sum = 0.0;
    for (std::size_t j = 0; j < w.bands; ++j) {
      const double r = gammatone_power_response(f, layout.center_freqs[j],
                                                layout.erb_bandwidths[j]);
      w.omega[j * bins + k] = r;
      col_sum += r;
    }
    for (std::size_t j = 0; j < w.bands; ++j) w.omega[j * bins + k] /= col_sum;
  }
  return w;
}

/// Band power: values[j] = sum_k omega[j,k] * bin_powers[k].
inline std::vector<double> band_power(std::span<const double> bin_powers,
                                      const SubbandWeights& weights) {
  if (bin_powers.size() != weights.bins) {
    throw std::invalid_argument("band_power: bin power dimension mismatch");
  }
  std::vector<double> values(weights.bands, 0.0);
  for (std::size_t j = 0; j < weights.bands; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < weights.bins; ++k) {
      acc += weights.omega[j * weights.bins + k] * bin_powers[k];
    }
    values[j] = acc;
  }
  return values;
}

}  // namespace nle

#endif  // NLE_FILTERBANK_HPP
