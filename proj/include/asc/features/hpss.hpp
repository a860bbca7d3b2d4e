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

#include <cstdint>
#include <utility>

#include "asc/dsp/grid.hpp"
#include "asc/dsp/median.hpp"
#include "asc/dsp/stft.hpp"
#include "asc/util/error.hpp"

namespace asc {

struct Kernel2d {
  std::size_t height = 1;
  std::size_t width = 1;
  bool operator==(const Kernel2d&) const = default;
};

// Complementary {0,1} masks over (bins x frames).
struct BinaryMaskPair {
  Grid<std::uint8_t> harmonic;
  Grid<std::uint8_t> percussive;
};

// Horizontal (time) median enhances sustained partials, vertical (frequency)
// median enhances transients. Ties go to the harmonic side.
inline BinaryMaskPair hpss_masks(const PowerGrid& grid, Kernel2d harmonic_kernel = {1, 31},
                                 Kernel2d percussive_kernel = {31, 1}) {
  const RealGrid h_med = median_filter_2d(grid.values, harmonic_kernel.height, harmonic_kernel.width);
  const RealGrid p_med = median_filter_2d(grid.values, percussive_kernel.height, percussive_kernel.width);
  BinaryMaskPair masks{Grid<std::uint8_t>(grid.bins(), grid.frames()),
                       Grid<std::uint8_t>(grid.bins(), grid.frames())};
  for (std::size_t i = 0; i < h_med.data.size(); ++i) {
    const std::uint8_t h = h_med.data[i] >= p_med.data[i] ? 1 : 0;
    masks.harmonic.data[i] = h;
    masks.percussive.data[i] = static_cast<std::uint8_t>(1 - h);
  }
  return masks;
}

struct HpssComponents {
  ComplexGrid harmonic;
  ComplexGrid percussive;
};

// Applies the masks to the original STFT. Because the masks are binary
// complements every cell lands in exactly one output, so the two outputs sum
// back to the input exactly.
inline HpssComponents hpss_split(const ComplexGrid& spec, const BinaryMaskPair& masks) {
  if (!masks.harmonic.same_shape(masks.percussive) || masks.harmonic.rows != spec.bins() ||
      masks.harmonic.cols != spec.frames())
    fail(ErrorKind::ShapeMismatch, "mask shape does not match STFT");
  HpssComponents out{spec, spec};
  for (std::size_t i = 0; i < spec.values.data.size(); ++i) {
    if (masks.harmonic.data[i] == 0) out.harmonic.values.data[i] = Complex{};
    if (masks.percussive.data[i] == 0) out.percussive.values.data[i] = Complex{};
  }
  return out;
}

}  // namespace asc
