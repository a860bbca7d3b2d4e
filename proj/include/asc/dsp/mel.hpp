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

#include <algorithm>
#include <cmath>
#include <vector>

#include "asc/dsp/grid.hpp"
#include "asc/dsp/stft.hpp"
#include "asc/util/error.hpp"

namespace asc {

// Slaney mel scale: linear below 1 kHz, logarithmic above.
namespace mel_scale {
inline constexpr double kLinearStep = 200.0 / 3.0;
inline constexpr double kBreakHz = 1000.0;
inline constexpr double kBreakMel = kBreakHz / kLinearStep;
inline const double kLogStep = std::log(6.4) / 27.0;

inline double hz_to_mel(double hz) {
  if (hz < kBreakHz) return hz / kLinearStep;
  return kBreakMel + std::log(hz / kBreakHz) / kLogStep;
}

inline double mel_to_hz(double mel) {
  if (mel < kBreakMel) return mel * kLinearStep;
  return kBreakHz * std::exp(kLogStep * (mel - kBreakMel));
}
}  // namespace mel_scale

struct MelBank {
  RealGrid weights;  // n_mels x bins
  std::vector<double> edges_hz;  // n_mels + 2 band edges; centres are edges[1..n]
  double f_min = 0.0;
  double f_max = 0.0;
  // Nonzero column range per row, [first, last).
  std::vector<std::pair<std::size_t, std::size_t>> support;

  std::size_t n_mels() const { return weights.rows; }
  std::size_t bins() const { return weights.cols; }
  double center_hz(std::size_t m) const { return edges_hz[m + 1]; }
};

// Triangular filters with peaks equally spaced in mel between f_min and
// f_max, each scaled by 2 / (upper edge - lower edge) in Hz.
inline MelBank mel_filterbank(std::size_t n_mels, const StftConfig& cfg, int sample_rate,
                              double f_min, double f_max) {
  cfg.validate();
  if (n_mels < 1) fail(ErrorKind::InvalidArgument, "n_mels must be >= 1");
  if (!(f_min >= 0.0 && f_min < f_max && f_max <= sample_rate / 2.0))
    fail(ErrorKind::InvalidArgument, "require 0 <= f_min < f_max <= sample_rate/2");

  const std::size_t bins = cfg.bins();
  MelBank bank;
  bank.f_min = f_min;
  bank.f_max = f_max;
  bank.weights = RealGrid(n_mels, bins);
  bank.edges_hz.resize(n_mels + 2);
  const double mel_lo = mel_scale::hz_to_mel(f_min);
  const double mel_hi = mel_scale::hz_to_mel(f_max);
  for (std::size_t i = 0; i < n_mels + 2; ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(n_mels + 1);
    bank.edges_hz[i] = mel_scale::mel_to_hz(mel);
  }

  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(cfg.fft_len);
  bank.support.resize(n_mels);
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = bank.edges_hz[m], mid = bank.edges_hz[m + 1], hi = bank.edges_hz[m + 2];
    const double norm = 2.0 / (hi - lo);
    std::size_t first = bins, last = 0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = bin_hz * static_cast<double>(k);
      const double rising = (f - lo) / (mid - lo);
      const double falling = (hi - f) / (hi - mid);
      const double w = std::max(0.0, std::min(rising, falling));
      if (w > 0.0) {
        bank.weights(m, k) = w * norm;
        first = std::min(first, k);
        last = k + 1;
      }
    }
    if (first >= last)
      fail(ErrorKind::DegenerateBand,
           "mel band " + std::to_string(m) + " (" + std::to_string(lo) + "-" + std::to_string(hi) +
               " Hz) covers no FFT bin");
    bank.support[m] = {first, last};
  }
  return bank;
}

struct LogMelOptions {
  double floor = 1e-10;
  double top_db = 80.0;

  bool operator==(const LogMelOptions&) const = default;
};

// bank * grid, then 10 log10(max(M, floor)) referenced to the matrix maximum
// (0 dB) and clamped at -top_db. A matrix with no energy above the floor has
// no meaningful reference and maps to -top_db everywhere.
inline RealGrid mel_log(const PowerGrid& grid, const MelBank& bank, LogMelOptions opt = {}) {
  if (grid.bins() != bank.bins())
    fail(ErrorKind::BinMismatch,
         "grid has " + std::to_string(grid.bins()) + " bins, bank expects " + std::to_string(bank.bins()));
  const std::size_t frames = grid.frames();
  RealGrid out(bank.n_mels(), frames);
  for (std::size_t m = 0; m < bank.n_mels(); ++m) {
    const auto [first, last] = bank.support[m];
    const double* w = bank.weights.row(m);
    double* dst = out.row(m);
    for (std::size_t k = first; k < last; ++k) {
      const double* src = grid.values.row(k);
      for (std::size_t t = 0; t < frames; ++t) dst[t] += w[k] * src[t];
    }
  }
  double peak = 0.0;
  for (double v : out.data) peak = std::max(peak, v);
  if (!(peak > opt.floor)) {
    std::fill(out.data.begin(), out.data.end(), -opt.top_db);
    return out;
  }
  const double ref_db = 10.0 * std::log10(peak);
  for (double& v : out.data) {
    const double db = 10.0 * std::log10(std::max(v, opt.floor)) - ref_db;
    v = std::max(db, -opt.top_db);
  }
  return out;
}

}  // namespace asc
