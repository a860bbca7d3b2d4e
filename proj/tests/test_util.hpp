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
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <unistd.h>

#include "asc/audio/wav.hpp"
#include "asc/nn/tensor.hpp"
#include "asc/util/rng.hpp"

namespace testutil {

inline asc::AudioClip sine(double hz, double seconds = 10.0, int rate = 48000, double amp = 0.5) {
  asc::AudioClip c;
  c.sample_rate = rate;
  c.samples.resize(static_cast<std::size_t>(seconds * rate));
  for (std::size_t n = 0; n < c.samples.size(); ++n)
    c.samples[n] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(n) / rate);
  return c;
}

// Unit impulses every rate/hz samples, starting at `offset`.
inline asc::AudioClip click_train(double hz, double seconds = 10.0, int rate = 48000, double amp = 0.9,
                                  std::size_t offset = 0) {
  asc::AudioClip c;
  c.sample_rate = rate;
  c.samples.assign(static_cast<std::size_t>(seconds * rate), 0.0);
  const auto period = static_cast<std::size_t>(std::lround(rate / hz));
  for (std::size_t n = offset; n < c.samples.size(); n += period) c.samples[n] = amp;
  return c;
}

inline asc::AudioClip noise(std::uint64_t seed, double seconds = 10.0, int rate = 48000, double amp = 0.3) {
  asc::AudioClip c;
  c.sample_rate = rate;
  asc::Rng rng(seed);
  c.samples.resize(static_cast<std::size_t>(seconds * rate));
  for (auto& s : c.samples) s = rng.uniform(-amp, amp);
  return c;
}

template <typename T>
asc::nn::Tensor<T> random_tensor(asc::nn::Shape s, asc::Rng& rng, double lo = -1.0, double hi = 1.0) {
  asc::nn::Tensor<T> t(s);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

// Elementwise relative error |a - n| / max(|a|, |n|, floor), maximised.
struct GradReport {
  double max_rel = 0.0;
  std::size_t worst = 0;
  double analytic = 0.0, numeric = 0.0;
};

// Central differences of `loss` with respect to every entry of `values`.
inline GradReport check_gradient(std::span<double> values, std::span<const double> analytic,
                                 const std::function<double()>& loss, double h = 1e-6, double floor = 1e-7) {
  GradReport r;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double keep = values[i];
    values[i] = keep + h;
    const double up = loss();
    values[i] = keep - h;
    const double down = loss();
    values[i] = keep;
    const double num = (up - down) / (2.0 * h);
    const double rel = std::abs(num - analytic[i]) / std::max({std::abs(num), std::abs(analytic[i]), floor});
    if (rel > r.max_rel) r = {rel, i, analytic[i], num};
  }
  return r;
}

// Fresh scratch directory under the build tree's temp area.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("asc_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
