// Copyright 2026 The bcnn-asc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "asc/audio/wav.hpp"
#include "asc/dsp/fft.hpp"
#include "asc/dsp/grid.hpp"
#include "asc/util/error.hpp"
#include "asc/util/parallel.hpp"

namespace asc {

struct StftConfig {
  std::size_t window_len = 2048;
  std::size_t hop_len = 960;
  std::size_t fft_len = 2048;
  // Reflect-pad by fft_len / 2 on both ends so frame t is centred on t * hop.
  bool center = true;

  std::size_t bins() const { return fft_len / 2 + 1; }

  void validate() const {
    if (hop_len < 1) fail(ErrorKind::InvalidConfig, "hop_len must be >= 1");
    if (window_len < 2) fail(ErrorKind::InvalidConfig, "window_len must be >= 2");
    if (fft_len < window_len) fail(ErrorKind::InvalidConfig, "fft_len must be >= window_len");
    if ((fft_len & (fft_len - 1)) != 0) fail(ErrorKind::InvalidConfig, "fft_len must be a power of two");
  }

  bool operator==(const StftConfig&) const = default;
};

struct ComplexGrid {
  Grid<Complex> values;  // bins x frames
  StftConfig config;
  int sample_rate = 0;

  std::size_t bins() const { return values.rows; }
  std::size_t frames() const { return values.cols; }
};

// Nonnegative magnitude representation of a ComplexGrid.
struct PowerGrid {
  RealGrid values;
  StftConfig config;
  int sample_rate = 0;

  std::size_t bins() const { return values.rows; }
  std::size_t frames() const { return values.cols; }
};

// Periodic Hann: w[n] = 0.5 - 0.5 cos(2 pi n / length).
inline std::vector<double> hann_window(std::size_t length) {
  if (length < 2) fail(ErrorKind::LengthTooSmall, "hann window length must be >= 2");
  std::vector<double> w(length);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(length);
  for (std::size_t n = 0; n < length; ++n) w[n] = 0.5 - 0.5 * std::cos(step * static_cast<double>(n));
  return w;
}

// numpy "reflect" indexing (edge sample not repeated).
inline std::size_t reflect_index(std::ptrdiff_t i, std::size_t len) {
  if (len == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (len - 1));
  i %= period;
  if (i < 0) i += period;
  const auto last = static_cast<std::ptrdiff_t>(len - 1);
  return static_cast<std::size_t>(i <= last ? i : period - i);
}

inline std::size_t stft_frame_count(std::size_t signal_len, const StftConfig& cfg) {
  if (cfg.center) return 1 + signal_len / cfg.hop_len;
  if (signal_len < cfg.window_len) return 0;
  return 1 + (signal_len - cfg.window_len) / cfg.hop_len;
}

// Hann-windowed STFT keeping bins 0..fft_len/2.
//
// With center=true the signal is reflect-padded by fft_len/2 and the window
// sits in the middle of each fft_len frame. With center=false each frame is
// window_len signal samples followed by zero padding.
inline ComplexGrid stft(const AudioClip& clip, const StftConfig& cfg) {
  cfg.validate();
  const std::size_t len = clip.samples.size();
  if (len == 0) fail(ErrorKind::InvalidArgument, "empty clip");
  if (!cfg.center && len < cfg.window_len)
    fail(ErrorKind::ClipShorterThanWindow,
         std::to_string(len) + " samples < window " + std::to_string(cfg.window_len));

  const auto window = hann_window(cfg.window_len);
  const std::size_t frames = stft_frame_count(len, cfg);
  const std::size_t bins = cfg.bins();
  const RealFft fft(cfg.fft_len);

  ComplexGrid out;
  out.config = cfg;
  out.sample_rate = clip.sample_rate;
  out.values = Grid<Complex>(bins, frames);

  const auto pad = static_cast<std::ptrdiff_t>(cfg.fft_len / 2);
  const std::size_t offset = cfg.center ? (cfg.fft_len - cfg.window_len) / 2 : 0;

  parallel_for(frames, [&](std::size_t t) {
    std::vector<double> frame(cfg.fft_len, 0.0);
    std::vector<Complex> spectrum(bins);
    const auto start = static_cast<std::ptrdiff_t>(t * cfg.hop_len + offset);
    for (std::size_t n = 0; n < cfg.window_len; ++n) {
      const std::ptrdiff_t pos = start + static_cast<std::ptrdiff_t>(n) - (cfg.center ? pad : 0);
      frame[offset + n] = clip.samples[reflect_index(pos, len)] * window[n];
    }
    fft.forward(frame, spectrum);
    for (std::size_t k = 0; k < bins; ++k) out.values(k, t) = spectrum[k];
  });
  return out;
}

// Entry-wise |z|^exponent.
inline PowerGrid power(const ComplexGrid& grid, double exponent = 2.0) {
  if (!(exponent > 0.0)) fail(ErrorKind::InvalidArgument, "power exponent must be > 0");
  PowerGrid out;
  out.config = grid.config;
  out.sample_rate = grid.sample_rate;
  out.values = RealGrid(grid.values.rows, grid.values.cols);
  for (std::size_t i = 0; i < grid.values.data.size(); ++i) {
    const Complex z = grid.values.data[i];
    double v;
    if (exponent == 2.0) {
      v = z.real() * z.real() + z.imag() * z.imag();
    } else if (exponent == 1.0) {
      v = std::abs(z);
    } else {
      v = std::pow(std::abs(z), exponent);
    }
    out.values.data[i] = v;
  }
  return out;
}

}  // namespace asc
