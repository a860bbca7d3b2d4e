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
#include <vector>

#include "asc/dsp/grid.hpp"
#include "asc/dsp/stft.hpp"
#include "asc/util/error.hpp"
#include "asc/util/parallel.hpp"

namespace asc {

// numpy "symmetric" indexing: ... b a | a b c ... c b | ...
inline std::size_t symmetric_index(std::ptrdiff_t i, std::size_t len) {
  const auto period = static_cast<std::ptrdiff_t>(2 * len);
  i %= period;
  if (i < 0) i += period;
  const auto n = static_cast<std::ptrdiff_t>(len);
  return static_cast<std::size_t>(i < n ? i : period - 1 - i);
}

inline RealGrid median_filter_2d(const RealGrid& grid, std::size_t kernel_h, std::size_t kernel_w) {
  if (kernel_h == 0 || kernel_w == 0 || kernel_h % 2 == 0 || kernel_w % 2 == 0)
    fail(ErrorKind::InvalidArgument, "median kernel dimensions must be odd and >= 1");
  RealGrid out(grid.rows, grid.cols);
  if (grid.data.empty()) return out;
  const auto half_h = static_cast<std::ptrdiff_t>(kernel_h / 2);
  const auto half_w = static_cast<std::ptrdiff_t>(kernel_w / 2);
  const std::size_t mid = kernel_h * kernel_w / 2;

  parallel_for(grid.rows, [&](std::size_t r) {
    std::vector<std::size_t> row_idx(kernel_h);
    for (std::size_t i = 0; i < kernel_h; ++i)
      row_idx[i] = symmetric_index(static_cast<std::ptrdiff_t>(r) - half_h + static_cast<std::ptrdiff_t>(i), grid.rows);
    std::vector<double> window(kernel_h * kernel_w);
    for (std::size_t c = 0; c < grid.cols; ++c) {
      std::size_t k = 0;
      for (std::size_t i = 0; i < kernel_h; ++i) {
        const double* src = grid.row(row_idx[i]);
        for (std::ptrdiff_t j = -half_w; j <= half_w; ++j)
          window[k++] = src[symmetric_index(static_cast<std::ptrdiff_t>(c) + j, grid.cols)];
      }
      std::nth_element(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(mid), window.end());
      out(r, c) = window[mid];
    }
  });
  return out;
}

inline PowerGrid median_filter_2d(const PowerGrid& grid, std::size_t kernel_h, std::size_t kernel_w) {
  PowerGrid out;
  out.config = grid.config;
  out.sample_rate = grid.sample_rate;
  out.values = median_filter_2d(grid.values, kernel_h, kernel_w);
  return out;
}

}  // namespace asc
