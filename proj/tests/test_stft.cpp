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

#include <nle/stft.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

using namespace nle;

namespace {

TimeSignal random_signal(std::size_t n, unsigned seed, double amp = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amp, amp);
  TimeSignal x;
  x.samples.resize(n);
  for (auto& s : x.samples) s = dist(rng);
  return x;
}

// Naive O(N^2) DFT of one windowed frame; the reference for analyze().
std::vector<std::complex<double>> dft_frame(const std::vector<double>& frame,
                                            const StftParams& p) {
  std::vector<std::complex<double>> out(p.bins());
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t n = 0; n < p.fft_size; ++n) {
      const double x = n < p.window_length ? p.window[n] * frame[n] : 0.0;
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) *
                         static_cast<double>(n) / static_cast<double>(p.fft_size);
      acc += x * std::complex<double>{std::cos(ang), std::sin(ang)};
    }
    out[k] = acc;
  }
  return out;
}

double max_interior_rel_error(const TimeSignal& a, const TimeSignal& b,
                              std::size_t guard) {
  double num = 0.0, den = 0.0;
  for (std::size_t n = guard; n + guard < a.samples.size(); ++n) {
    const double d = a.samples[n] - b.samples[n];
    num += d * d;
    den += a.samples[n] * a.samples[n];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("hann window satisfies constant overlap-add at half hop") {
  const StftParams p = make_hann_params();
  REQUIRE(cola_deviation(p) <= 1e-12);
}

TEST_CASE("analyze rejects signals shorter than one window") {
  const StftParams p = make_hann_params();
  TimeSignal x;
  x.samples.assign(p.window_length - 1, 0.0);
  REQUIRE_THROWS_WITH(analyze(x, p), Catch::Matchers::ContainsSubstring(
                                         "insufficient samples"));
}

TEST_CASE("all-zero signal analyzes to an all-zero spectrogram") {
  const StftParams p = make_hann_params();
  TimeSignal x;
  x.samples.assign(4 * p.window_length, 0.0);
  const Spectrogram spec = analyze(x, p);
  REQUIRE(spec.frames == (x.samples.size() - p.window_length) / p.hop + 1);
  for (const auto& c : spec.coeffs) REQUIRE(std::abs(c) == 0.0);
}

TEST_CASE("analyze matches a direct DFT of each windowed frame") {
  const StftParams p = make_hann_params();
  const TimeSignal x = random_signal(3 * p.window_length, 11);
  const Spectrogram spec = analyze(x, p);
  for (std::size_t i = 0; i < spec.frames; ++i) {
    std::vector<double> frame(x.samples.begin() + static_cast<long>(i * p.hop),
                              x.samples.begin() +
                                  static_cast<long>(i * p.hop + p.window_length));
    const auto ref = dft_frame(frame, p);
    for (std::size_t k = 0; k < spec.bins; ++k) {
      REQUIRE(std::abs(spec.at(k, i) - ref[k]) < 1e-9);
    }
  }
}

TEST_CASE("pure tone at a bin center concentrates energy in that bin") {
  const StftParams p = make_hann_params();
  const double fs = 16000.0;
  const std::size_t tone_bin = 40;
  const double f = static_cast<double>(tone_bin) * fs /
                   static_cast<double>(p.fft_size);
  TimeSignal x;
  x.sample_rate = fs;
  x.samples.resize(4 * p.window_length);
  for (std::size_t n = 0; n < x.samples.size(); ++n) {
    x.samples[n] =
        std::sin(2.0 * std::numbers::pi * f * static_cast<double>(n) / fs);
  }
  const Spectrogram spec = analyze(x, p);
  // A Hann-windowed exact-bin tone leaks into the two adjacent bins only;
  // everything else sits far below the peak.
  for (std::size_t i = 0; i < spec.frames; ++i) {
    const double peak = std::abs(spec.at(tone_bin, i));
    for (std::size_t k = 0; k < spec.bins; ++k) {
      if (k + 1 >= tone_bin && k <= tone_bin + 1) continue;
      REQUIRE(std::abs(spec.at(k, i)) < peak * 1e-2);  // >= 40 dB down
    }
  }
}

TEST_CASE("parseval: windowed-frame time energy equals spectral energy") {
  const StftParams p = make_hann_params();
  const TimeSignal x = random_signal(5 * p.window_length, 22);
  const Spectrogram spec = analyze(x, p);
  for (std::size_t i = 0; i < spec.frames; ++i) {
    double time_energy = 0.0;
    for (std::size_t n = 0; n < p.window_length; ++n) {
      const double wx = p.window[n] * x.samples[i * p.hop + n];
      time_energy += wx * wx;
    }
    double spec_energy = 0.0;
    for (std::size_t k = 0; k < spec.bins; ++k) {
      spec_energy += one_sided_weight(k, spec.bins) * std::norm(spec.at(k, i));
    }
    spec_energy /= static_cast<double>(p.fft_size);
    REQUIRE(std::abs(spec_energy - time_energy) <= 1e-9 * time_energy);
  }
}

TEST_CASE("analyze is linear") {
  const StftParams p = make_hann_params();
  const TimeSignal x = random_signal(3 * p.window_length, 5);
  const TimeSignal y = random_signal(3 * p.window_length, 6);
  const double a = 1.7, b = -0.4;
  TimeSignal mix;
  mix.samples.resize(x.samples.size());
  for (std::size_t n = 0; n < mix.samples.size(); ++n) {
    mix.samples[n] = a * x.samples[n] + b * y.samples[n];
  }
  const Spectrogram sx = analyze(x, p);
  const Spectrogram sy = analyze(y, p);
  const Spectrogram sm = analyze(mix, p);
  double scale = 0.0;
  for (const auto& c : sm.coeffs) scale = std::max(scale, std::abs(c));
  for (std::size_t idx = 0; idx < sm.coeffs.size(); ++idx) {
    const auto lin = a * sx.coeffs[idx] + b * sy.coeffs[idx];
    REQUIRE(std::abs(sm.coeffs[idx] - lin) <= 1e-12 * scale);
  }
}

TEST_CASE("analyze then synthesize reconstructs the interior") {
  const StftParams p = make_hann_params();
  for (unsigned seed : {1u, 2u, 3u}) {
    const TimeSignal x = random_signal(16000 + 413 * seed, seed);
    const TimeSignal y = synthesize(analyze(x, p));
    REQUIRE(y.samples.size() <= x.samples.size());
    TimeSignal x_trunc = x;
    x_trunc.samples.resize(y.samples.size());
    REQUIRE(max_interior_rel_error(x_trunc, y, p.window_length) <= 1e-10);
  }
}

TEST_CASE("all-zero spectrogram synthesizes to silence") {
  const StftParams p = make_hann_params();
  TimeSignal x;
  x.samples.assign(4 * p.window_length, 0.0);
  Spectrogram spec = analyze(x, p);
  const TimeSignal y = synthesize(spec);
  for (double s : y.samples) REQUIRE(s == 0.0);
}

TEST_CASE("scaling all coefficients scales the reconstruction") {
  const StftParams p = make_hann_params();
  const TimeSignal x = random_signal(8000, 77);
  Spectrogram spec = analyze(x, p);
  const double g = 0.35;
  for (auto& c : spec.coeffs) c *= g;
  const TimeSignal y = synthesize(spec);
  TimeSignal gx = x;
  gx.samples.resize(y.samples.size());
  for (auto& s : gx.samples) s *= g;
  REQUIRE(max_interior_rel_error(gx, y, p.window_length) <= 1e-10);
}

TEST_CASE("synthesize rejects inconsistent spectrograms") {
  const StftParams p = make_hann_params();
  const TimeSignal x = random_signal(4096, 8);
  Spectrogram spec = analyze(x, p);
  SECTION("bins inconsistent with fft size") {
    spec.bins -= 1;
    REQUIRE_THROWS_AS(synthesize(spec), std::invalid_argument);
  }
  SECTION("corrupt window") {
    spec.params.window.pop_back();
    REQUIRE_THROWS_AS(synthesize(spec), std::invalid_argument);
  }
  SECTION("hop not dividing window") {
    spec.params.hop = 100;
    REQUIRE_THROWS_AS(synthesize(spec), std::invalid_argument);
  }
}

TEST_CASE("apply_gains") {
  const StftParams p = make_hann_params();
  const TimeSignal x = random_signal(4096, 33);
  const Spectrogram spec = analyze(x, p);

  SECTION("unit gains leave every coefficient bit-identical") {
    std::vector<double> ones(spec.coeffs.size(), 1.0);
    const Spectrogram out = apply_gains(spec, ones);
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) {
      REQUIRE(out.coeffs[i].real() == spec.coeffs[i].real());
      REQUIRE(out.coeffs[i].imag() == spec.coeffs[i].imag());
    }
  }
  SECTION("gain 2 doubles coefficients and quadruples power") {
    std::vector<double> twos(spec.coeffs.size(), 2.0);
    const Spectrogram out = apply_gains(spec, twos);
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) {
      REQUIRE(std::abs(out.coeffs[i] - 2.0 * spec.coeffs[i]) == 0.0);
      REQUIRE(std::norm(out.coeffs[i]) ==
              Catch::Approx(4.0 * std::norm(spec.coeffs[i])));
    }
  }
  SECTION("one-hot frame column keeps only that frame") {
    std::vector<double> gains(spec.coeffs.size(), 0.0);
    const std::size_t hot = 2;
    for (std::size_t k = 0; k < spec.bins; ++k) gains[hot * spec.bins + k] = 1.0;
    const Spectrogram out = apply_gains(spec, gains);
    for (std::size_t i = 0; i < out.frames; ++i) {
      for (std::size_t k = 0; k < out.bins; ++k) {
        if (i == hot) {
          REQUIRE(out.at(k, i) == spec.at(k, i));
        } else {
          REQUIRE(std::abs(out.at(k, i)) == 0.0);
        }
      }
    }
  }
  SECTION("dimension mismatch and negative gains are rejected") {
    std::vector<double> bad(spec.coeffs.size() - 1, 1.0);
    REQUIRE_THROWS_AS(apply_gains(spec, bad), std::invalid_argument);
    std::vector<double> neg(spec.coeffs.size(), 1.0);
    neg[3] = -0.1;
    REQUIRE_THROWS_AS(apply_gains(spec, neg), std::invalid_argument);
  }
}

TEST_CASE("apply_bin_gains applies one vector to every frame") {
  const StftParams p = make_hann_params();
  const TimeSignal x = random_signal(4096, 44);
  const Spectrogram spec = analyze(x, p);
  std::vector<double> g(spec.bins);
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = 0.5 + 0.01 * static_cast<double>(k);
  const Spectrogram out = apply_bin_gains(spec, g);
  for (std::size_t i = 0; i < out.frames; ++i) {
    for (std::size_t k = 0; k < out.bins; ++k) {
      REQUIRE(std::abs(out.at(k, i) - g[k] * spec.at(k, i)) == 0.0);
    }
  }
}
