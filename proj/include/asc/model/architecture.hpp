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

#include <optional>
#include <string>
#include <vector>

#include "asc/nn/layers.hpp"
#include "asc/scenes.hpp"
#include "asc/util/error.hpp"

namespace asc {

struct ConvSpec {
  std::size_t filters = 1;
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  bool operator==(const ConvSpec&) const = default;
};

enum class KernelOrientation { Horizontal, Vertical, Any };

// One stream: parallel conv branches (each conv + BN + ReLU) concatenated on
// depth, optional pool, conv2 + BN + ReLU, optional pool.
struct StreamSpec {
  std::size_t input_h = 0;
  std::size_t input_w = 0;
  std::vector<ConvSpec> branches;
  std::optional<nn::PoolSpec> pool_after_concat;
  ConvSpec conv2;
  std::optional<nn::PoolSpec> pool_after_conv2;
  KernelOrientation orientation = KernelOrientation::Any;

  std::size_t concat_channels() const {
    std::size_t c = 0;
    for (const auto& b : branches) c += b.filters;
    return c;
  }

  // Output (h, w, c) per example; throws if a pool does not fit.
  nn::Shape output_shape() const {
    std::size_t h = input_h, w = input_w;
    auto apply = [&](const std::optional<nn::PoolSpec>& p) {
      if (!p) return;
      if (h < p->pool_h || w < p->pool_w) fail(ErrorKind::WindowTooLarge, "pool larger than stream feature map");
      h = p->out_h(h);
      w = p->out_w(w);
    };
    apply(pool_after_concat);
    apply(pool_after_conv2);
    return nn::Shape{1, h, w, conv2.filters};
  }

  void validate(const std::string& name) const {
    if (input_h == 0 || input_w == 0) fail(ErrorKind::InvalidConfig, name + ": input shape must be positive");
    if (branches.empty()) fail(ErrorKind::InvalidConfig, name + ": at least one branch required");
    for (const auto& b : branches) {
      if (b.filters == 0 || b.kernel_h == 0 || b.kernel_w == 0)
        fail(ErrorKind::InvalidConfig, name + ": branch dimensions must be >= 1");
      if (orientation == KernelOrientation::Horizontal && b.kernel_h != 1)
        fail(ErrorKind::InvalidConfig, name + ": branch kernels must be (1 x m)");
      if (orientation == KernelOrientation::Vertical && b.kernel_w != 1)
        fail(ErrorKind::InvalidConfig, name + ": branch kernels must be (n x 1)");
    }
    if (conv2.filters == 0 || conv2.kernel_h == 0 || conv2.kernel_w == 0)
      fail(ErrorKind::InvalidConfig, name + ": conv2 dimensions must be >= 1");
    for (const auto& p : {pool_after_concat, pool_after_conv2}) {
      if (p && (p->pool_h == 0 || p->pool_w == 0 || p->stride_h == 0 || p->stride_w == 0))
        fail(ErrorKind::InvalidConfig, name + ": pool dims and strides must be >= 1");
    }
    output_shape();
  }

  bool operator==(const StreamSpec&) const = default;
};

enum class HeadKind { Bilinear, HarmonicOnly, PercussiveOnly };

struct ArchitectureSpec {
  StreamSpec hcnn;
  StreamSpec pcnn;
  HeadKind head = HeadKind::Bilinear;
  double bn_eps = 1e-3;
  double bn_momentum = 0.99;
  std::vector<std::string> labels = default_scenes();

  std::size_t classes() const { return labels.size(); }

  std::size_t classifier_inputs() const {
    switch (head) {
      case HeadKind::Bilinear: return hcnn.conv2.filters * pcnn.conv2.filters;
      case HeadKind::HarmonicOnly: return hcnn.conv2.filters;
      case HeadKind::PercussiveOnly: return pcnn.conv2.filters;
    }
    return 0;
  }

  bool uses_hcnn() const { return head != HeadKind::PercussiveOnly; }
  bool uses_pcnn() const { return head != HeadKind::HarmonicOnly; }

  void validate() const {
    hcnn.validate("hcnn");
    pcnn.validate("pcnn");
    if (labels.size() < 2) fail(ErrorKind::InvalidConfig, "need at least two labels");
    if (!(bn_eps > 0.0) || !(bn_momentum > 0.0 && bn_momentum < 1.0))
      fail(ErrorKind::InvalidConfig, "batch norm eps must be > 0 and momentum in (0, 1)");
    if (head == HeadKind::Bilinear) {
      const auto h = hcnn.output_shape(), p = pcnn.output_shape();
      if (h.spatial() != p.spatial())
        fail(ErrorKind::PositionCountMismatch, "stream outputs have " + std::to_string(h.spatial()) + " and " +
                                                   std::to_string(p.spatial()) + " positions");
    }
  }

  // Default network: inception-style time filters on the 80x500 harmonic input,
  // frequency filters on the 256x20 percussive input, 256-channel outputs.
  static ArchitectureSpec defaults() {
    ArchitectureSpec a;
    a.hcnn.input_h = 80;
    a.hcnn.input_w = 500;
    a.hcnn.orientation = KernelOrientation::Horizontal;
    for (auto [f, m] : std::vector<std::pair<std::size_t, std::size_t>>{
             {16, 6}, {16, 26}, {16, 50}, {16, 76}, {8, 96}, {8, 120}, {8, 146}, {8, 170}, {8, 196}, {8, 220}})
      a.hcnn.branches.push_back({f, 1, m});
    a.hcnn.pool_after_concat = nn::PoolSpec::square(4, 10);
    a.hcnn.conv2 = {256, 7, 7};
    a.hcnn.pool_after_conv2 = nn::PoolSpec::square(2, 2);

    a.pcnn.input_h = 256;
    a.pcnn.input_w = 20;
    a.pcnn.orientation = KernelOrientation::Vertical;
    for (auto [f, n] : std::vector<std::pair<std::size_t, std::size_t>>{
             {32, 10}, {32, 25}, {32, 42}, {16, 70}, {16, 100}, {16, 110}, {16, 120}, {16, 150}, {16, 160}, {16, 220}})
      a.pcnn.branches.push_back({f, n, 1});
    a.pcnn.conv2 = {256, 5, 5};
    a.pcnn.pool_after_conv2 = nn::PoolSpec::square(10, 2);
    return a;
  }

  bool operator==(const ArchitectureSpec&) const = default;
};

}  // namespace asc
