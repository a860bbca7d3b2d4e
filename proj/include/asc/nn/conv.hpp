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

#include <vector>

#include "asc/nn/tensor.hpp"
#include "asc/util/parallel.hpp"

namespace asc::nn {

enum class Mode { Train, Infer };

// Same-padded 2-D cross-correlation. Kernels are stored (out, n, m, in); for
// even kernel extents the extra padding goes after, as in TensorFlow.
template <typename T>
class Conv2d {
 public:
  struct Trace {
    Tensor<T> input;
    bool recorded = false;
  };

  Conv2d() = default;
  Conv2d(std::size_t in_ch, std::size_t out_ch, std::size_t kh, std::size_t kw)
      : weight(Shape{out_ch, kh, kw, in_ch}), bias(Shape{1, 1, 1, out_ch}) {
    if (in_ch == 0 || out_ch == 0 || kh == 0 || kw == 0)
      fail(ErrorKind::InvalidArgument, "conv dimensions must be >= 1");
    weight.ensure_grad();
    bias.ensure_grad();
  }

  std::size_t in_channels() const { return weight.shape().c; }
  std::size_t out_channels() const { return weight.shape().n; }
  std::size_t kernel_h() const { return weight.shape().h; }
  std::size_t kernel_w() const { return weight.shape().w; }

  Tensor<T> forward(const Tensor<T>& x, Trace* trace = nullptr) const {
    const Shape& s = x.shape();
    if (s.c != in_channels())
      fail(ErrorKind::ChannelMismatch,
           "conv expects " + std::to_string(in_channels()) + " channels, got " + std::to_string(s.c));
    const std::size_t kh = kernel_h(), kw = kernel_w(), ci = in_channels(), co = out_channels();
    const auto ph = static_cast<std::ptrdiff_t>((kh - 1) / 2);
    const auto pw = static_cast<std::ptrdiff_t>((kw - 1) / 2);

    // (n, m, in, out) copy so the innermost loop runs over output channels.
    std::vector<T> wt(weight.size());
    for (std::size_t o = 0; o < co; ++o)
      for (std::size_t a = 0; a < kh; ++a)
        for (std::size_t b = 0; b < kw; ++b)
          for (std::size_t i = 0; i < ci; ++i)
            wt[((a * kw + b) * ci + i) * co + o] = weight.at(o, a, b, i);

    Tensor<T> y(Shape{s.n, s.h, s.w, co});
    parallel_for(s.n * s.h, [&](std::size_t row) {
      const std::size_t n = row / s.h;
      const auto oy = static_cast<std::ptrdiff_t>(row % s.h);
      for (std::size_t ox = 0; ox < s.w; ++ox) {
        T* acc = &y.at(n, static_cast<std::size_t>(oy), ox, 0);
        for (std::size_t o = 0; o < co; ++o) acc[o] = bias[o];
        for (std::size_t a = 0; a < kh; ++a) {
          const std::ptrdiff_t iy = oy + static_cast<std::ptrdiff_t>(a) - ph;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(s.h)) continue;
          for (std::size_t b = 0; b < kw; ++b) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox + b) - pw;
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(s.w)) continue;
            const T* in = &x.at(n, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix), 0);
            const T* wk = &wt[(a * kw + b) * ci * co];
            for (std::size_t i = 0; i < ci; ++i) {
              const T v = in[i];
              const T* wr = wk + i * co;
              for (std::size_t o = 0; o < co; ++o) acc[o] += v * wr[o];
            }
          }
        }
      }
    });
    if (trace != nullptr) {
      trace->input = x;
      trace->recorded = true;
    }
    return y;
  }

  // Accumulates into weight.grad() / bias.grad(); returns dL/dx.
  Tensor<T> backward(const Tensor<T>& dy, const Trace& trace) {
    if (!trace.recorded) fail(ErrorKind::NoTrace, "conv backward without forward trace");
    const Tensor<T>& x = trace.input;
    const Shape& s = x.shape();
    const std::size_t kh = kernel_h(), kw = kernel_w(), ci = in_channels(), co = out_channels();
    if (dy.shape() != Shape{s.n, s.h, s.w, co}) fail(ErrorKind::ShapeMismatch, "conv backward gradient shape");
    const auto ph = static_cast<std::ptrdiff_t>((kh - 1) / 2);
    const auto pw = static_cast<std::ptrdiff_t>((kw - 1) / 2);
    const auto H = static_cast<std::ptrdiff_t>(s.h), W = static_cast<std::ptrdiff_t>(s.w);

    // dx: gather form, each input pixel owned by one task.
    Tensor<T> dx(s);
    parallel_for(s.n * s.h, [&](std::size_t row) {
      const std::size_t n = row / s.h;
      const auto iy = static_cast<std::ptrdiff_t>(row % s.h);
      for (std::size_t ixu = 0; ixu < s.w; ++ixu) {
        const auto ix = static_cast<std::ptrdiff_t>(ixu);
        T* acc = &dx.at(n, static_cast<std::size_t>(iy), ixu, 0);
        for (std::size_t a = 0; a < kh; ++a) {
          const std::ptrdiff_t oy = iy - static_cast<std::ptrdiff_t>(a) + ph;
          if (oy < 0 || oy >= H) continue;
          for (std::size_t b = 0; b < kw; ++b) {
            const std::ptrdiff_t ox = ix - static_cast<std::ptrdiff_t>(b) + pw;
            if (ox < 0 || ox >= W) continue;
            const T* g = &dy.at(n, static_cast<std::size_t>(oy), static_cast<std::size_t>(ox), 0);
            for (std::size_t o = 0; o < co; ++o) {
              const T go = g[o];
              if (go == T{}) continue;
              const T* wr = &weight.at(o, a, b, 0);
              for (std::size_t i = 0; i < ci; ++i) acc[i] += go * wr[i];
            }
          }
        }
      }
    });

    // dW: one task per output channel, summed in (n, y, x) order.
    auto wgrad = weight.grad();
    parallel_for(co, [&](std::size_t o) {
      std::vector<T> local(kh * kw * ci, T{});
      for (std::size_t n = 0; n < s.n; ++n) {
        for (std::ptrdiff_t oy = 0; oy < H; ++oy) {
          for (std::ptrdiff_t ox = 0; ox < W; ++ox) {
            const T go = dy.at(n, static_cast<std::size_t>(oy), static_cast<std::size_t>(ox), o);
            if (go == T{}) continue;
            for (std::size_t a = 0; a < kh; ++a) {
              const std::ptrdiff_t iy = oy + static_cast<std::ptrdiff_t>(a) - ph;
              if (iy < 0 || iy >= H) continue;
              for (std::size_t b = 0; b < kw; ++b) {
                const std::ptrdiff_t ix = ox + static_cast<std::ptrdiff_t>(b) - pw;
                if (ix < 0 || ix >= W) continue;
                const T* in = &x.at(n, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix), 0);
                T* dst = &local[(a * kw + b) * ci];
                for (std::size_t i = 0; i < ci; ++i) dst[i] += go * in[i];
              }
            }
          }
        }
      }
      T* out = &wgrad[o * kh * kw * ci];
      for (std::size_t k = 0; k < local.size(); ++k) out[k] += local[k];
    });

    auto bgrad = bias.grad();
    const std::size_t positions = s.n * s.h * s.w;
    for (std::size_t p = 0; p < positions; ++p) {
      const T* g = dy.data() + p * co;
      for (std::size_t o = 0; o < co; ++o) bgrad[o] += g[o];
    }
    return dx;
  }

  Tensor<T> weight;
  Tensor<T> bias;
};

}  // namespace asc::nn
