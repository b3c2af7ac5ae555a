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

#ifndef NLE_STFT_HPP
#define NLE_STFT_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nle {

/// Mono time-domain signal with amplitudes on a dimensionless full scale.
struct TimeSignal {
  std::vector<double> samples;
  double sample_rate{16000.0};
};

/// Analysis/synthesis framing: `hop` must divide `window_length`, and the
/// window must satisfy constant overlap-add at that hop.
struct StftParams {
  std::size_t window_length{512};
  std::size_t hop{256};
  std::size_t fft_size{512};
  std::vector<double> window;

  std::size_t bins() const { return fft_size / 2 + 1; }
};

/// One-sided complex STFT coefficients, frame-major storage
/// (coefficient of bin k in frame i lives at coeffs[i * bins + k]).
struct Spectrogram {
  std::vector<std::complex<double>> coeffs;
  std::size_t bins{0};
  std::size_t frames{0};
  StftParams params;
  double sample_rate{16000.0};

  std::complex<double>& at(std::size_t k, std::size_t i) {
    return coeffs[i * bins + k];
  }
  const std::complex<double>& at(std::size_t k, std::size_t i) const {
    return coeffs[i * bins + k];
  }
};

namespace detail {

inline bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 FFT, in place. Forward uses e^{-i2pi kn/N}; the inverse
// applies the 1/N scaling so ifft(fft(x)) == x.
inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("fft size must be a power of two");
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen = std::polar(1.0, angle);
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w{1.0, 0.0};
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= scale;
  }
}

}  // namespace detail

/// Periodic Hann analysis window. 512/256/512 gives the 32 ms, 50% overlap
/// framing used by the default pipeline at 16 kHz.
inline StftParams make_hann_params(std::size_t window_length = 512,
                                   std::size_t hop = 256,
                                   std::size_t fft_size = 512) {
  StftParams p;
  p.window_length = window_length;
  p.hop = hop;
  p.fft_size = fft_size;
  p.window.resize(window_length);
  for (std::size_t n = 0; n < window_length; ++n) {
    p.window[n] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                             static_cast<double>(window_length));
  }
  return p;
}

/// Peak deviation of the overlapped window sum from a constant. Interior
/// samples at offset n are covered by the same window taps for every frame,
/// so one hop period captures the whole profile.
inline double cola_deviation(const StftParams& p) {
  if (p.hop == 0 || p.window_length % p.hop != 0) {
    return std::numeric_limits<double>::infinity();
  }
  const std::size_t per_period = p.window_length / p.hop;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < p.hop; ++n) {
    double s = 0.0;
    for (std::size_t i = 0; i < per_period; ++i) s += p.window[n + i * p.hop];
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return hi - lo;
}

inline void validate_params(const StftParams& p) {
  if (p.window_length == 0 || p.hop == 0) {
    throw std::invalid_argument("stft: window_length and hop must be positive");
  }
  if (p.window_length % p.hop != 0) {
    throw std::invalid_argument("stft: hop must divide window_length");
  }
  if (p.fft_size < p.window_length || !detail::is_power_of_two(p.fft_size)) {
    throw std::invalid_argument(
        "stft: fft_size must be a power of two >= window_length");
  }
  if (p.window.size() != p.window_length) {
    throw std::invalid_argument("stft: window length mismatch");
  }
  if (cola_deviation(p) > 1e-12) {
    throw std::invalid_argument(
        "stft: window does not satisfy constant overlap-add at this hop");
  }
}

/// Sum of squared window taps; the spectral power calibration below divides
/// by it so bin powers live on the per-sample signal power scale.
inline double window_energy(const StftParams& p) {
  double e = 0.0;
  for (double w : p.window) e += w * w;
  return e;
}

/// Multiplicity of a one-sided bin: DC and Nyquist appear once in the full
/// spectrum, every other bin stands for a conjugate pair.
inline double one_sided_weight(std::size_t k, std::size_t bins) {
  return (k == 0 || k + 1 == bins) ? 1.0 : 2.0;
}

/// Windowed one-sided STFT. Frames start at multiples of hop; trailing
/// samples that do not fill a window are dropped.
inline Spectrogram analyze(const TimeSignal& signal, const StftParams& params) {
  validate_params(params);
  if (signal.samples.size() < params.window_length) {
    throw std::invalid_argument("stft: insufficient samples");
  }
  const std::size_t frames =
      (signal.samples.size() - params.window_length) / params.hop + 1;
  const std::size_t bins = params.bins();

  Spectrogram spec;
  spec.bins = bins;
  spec.frames = frames;
  spec.params = params;
  spec.sample_rate = signal.sample_rate;
  spec.coeffs.resize(bins * frames);

  std::vector<std::complex<double>> buf(params.fft_size);
  for (std::size_t i = 0; i < frames; ++i) {
    const double* x = signal.samples.data() + i * params.hop;
    for (std::size_t n = 0; n < params.window_length; ++n) {
      buf[n] = params.window[n] * x[n];
    }
    std::fill(buf.begin() + static_cast<std::ptrdiff_t>(params.window_length),
              buf.end(), std::complex<double>{0.0, 0.0});
    detail::fft_inplace(buf, false);
    for (std::size_t k = 0; k < bins; ++k) spec.coeffs[i * bins + k] = buf[k];
  }
  return spec;
}

/// Weighted overlap-add synthesis: each inverse-transformed frame is shaped
/// by the analysis window again and the result is renormalized per sample by
/// the accumulated squared-window profile. analyze -> synthesize therefore
/// reproduces the input wherever that profile is nonzero.
inline TimeSignal synthesize(const Spectrogram& spec) {
  validate_params(spec.params);
  if (spec.bins != spec.params.bins()) {
    throw std::invalid_argument("stft: spectrogram bins inconsistent with params");
  }
  if (spec.frames == 0 || spec.coeffs.size() != spec.bins * spec.frames) {
    throw std::invalid_argument("stft: spectrogram storage inconsistent");
  }
  const StftParams& p = spec.params;
  const std::size_t out_len = (spec.frames - 1) * p.hop + p.window_length;

  std::vector<double> acc(out_len, 0.0);
  std::vector<double> norm(out_len, 0.0);
  std::vector<std::complex<double>> buf(p.fft_size);
  for (std::size_t i = 0; i < spec.frames; ++i) {
    for (std::size_t k = 0; k < spec.bins; ++k) buf[k] = spec.at(k, i);
    // Rebuild the conjugate-symmetric upper half before inverting.
    for (std::size_t k = spec.bins; k < p.fft_size; ++k) {
      buf[k] = std::conj(buf[p.fft_size - k]);
    }
    detail::fft_inplace(buf, true);
    const std::size_t base = i * p.hop;
    for (std::size_t n = 0; n < p.window_length; ++n) {
      acc[base + n] += p.window[n] * buf[n].real();
      norm[base + n] += p.window[n] * p.window[n];
    }
  }

  TimeSignal out;
  out.sample_rate = spec.sample_rate;
  out.samples.resize(out_len);
  for (std::size_t n = 0; n < out_len; ++n) {
    out.samples[n] = norm[n] > 0.0 ? acc[n] / norm[n] : 0.0;
  }
  return out;
}

/// Element-wise spectral gains, one value per (bin, frame), stored like
/// Spectrogram::coeffs. Gains must be non-negative.
inline Spectrogram apply_gains(const Spectrogram& spec,
                               std::span<const double> gains) {
  if (gains.size() != spec.coeffs.size()) {
    throw std::invalid_argument("apply_gains: gain matrix dimension mismatch");
  }
  Spectrogram out = spec;
  for (std::size_t idx = 0; idx < gains.size(); ++idx) {
    if (!(gains[idx] >= 0.0)) {
      throw std::invalid_argument("apply_gains: negative gain");
    }
    out.coeffs[idx] *= gains[idx];
  }
  return out;
}

/// Time-invariant variant: the same per-bin gain vector applied to every frame.
inline Spectrogram apply_bin_gains(const Spectrogram& spec,
                                   std::span<const double> bin_gains) {
  if (bin_gains.size() != spec.bins) {
    throw std::invalid_argument("apply_bin_gains: bin gain dimension mismatch");
  }
  for (double g : bin_gains) {
    if (!(g >= 0.0)) throw std::invalid_argument("apply_bin_gains: negative gain");
  }
  Spectrogram out = spec;
  for (std::size_t i = 0; i < spec.frames; ++i) {
    for (std::size_t k = 0; k < spec.bins; ++k) {
      out.coeffs[i * spec.bins + k] *= bin_gains[k];
    }
  }
  return out;
}

}  // namespace nle

#endif  // NLE_STFT_HPP
