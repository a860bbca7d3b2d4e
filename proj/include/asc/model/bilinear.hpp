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
#include <vector>

#include "asc/nn/tensor.hpp"

namespace asc {

inline constexpr double kL2ZeroGuard = 1e-12;

// B = H^T P per batch item, with H (positions x c_h) and P (positions x c_p)
// read row-major from the two stream outputs. Equivalent to summing the
// outer products h_s p_s^T over positions s. Returns (N, 1, 1, c_h * c_p),
// row index over H channels.
template <typename T>
nn::Tensor<T> bilinear_matrix(const nn::Tensor<T>& h, const nn::Tensor<T>& p) {
  const nn::Shape& hs = h.shape();
  const nn::Shape& ps = p.shape();
  if (hs.n != ps.n) fail(ErrorKind::ShapeMismatch, "stream batch sizes differ");
  if (hs.spatial() != ps.spatial())
    fail(ErrorKind::PositionCountMismatch,
         "streams have " + std::to_string(hs.spatial()) + " and " + std::to_string(ps.spatial()) + " positions");
  const std::size_t positions = hs.spatial(), ch = hs.c, cp = ps.c;
  nn::Tensor<T> b(nn::Shape{hs.n, 1, 1, ch * cp});
  for (std::size_t n = 0; n < hs.n; ++n) {
    T* dst = b.data() + n * ch * cp;
    const T* hrow = h.data() + n * positions * ch;
    const T* prow = p.data() + n * positions * cp;
    for (std::size_t s = 0; s < positions; ++s) {
      const T* hv = hrow + s * ch;
      const T* pv = prow + s * cp;
      for (std::size_t i = 0; i < ch; ++i) {
        const T a = hv[i];
        if (a == T{}) continue;
        T* out = dst + i * cp;
        for (std::size_t j = 0; j < cp; ++j) out[j] += a * pv[j];
      }
    }
  }
  return b;
}

template <typename T>
T signed_sqrt(T x) {
  return x < T{} ? -std::sqrt(-x) : std::sqrt(x);
}

template <typename T>
struct BilinearTrace {
  nn::Tensor<T> h, p;
  nn::Tensor<T> raw;          // B before signed square root
  nn::Tensor<T> normalized;   // final output
  std::vector<T> norms;       // per item, of the signed-sqrt vector
  bool recorded = false;
};

// Bilinear pooling, then sign(x) sqrt(|x|), then unit l2 norm per item. Items
// whose norm falls below kL2ZeroGuard are left unscaled.
template <typename T>
nn::Tensor<T> bilinear_pool(const nn::Tensor<T>& h, const nn::Tensor<T>& p, BilinearTrace<T>* trace = nullptr) {
  if (h.shape().c == 0 || p.shape().c == 0) fail(ErrorKind::ChannelMismatch, "empty channel dimension");
  nn::Tensor<T> raw = bilinear_matrix(h, p);
  const std::size_t batch = raw.shape().n, d = raw.shape().c;
  nn::Tensor<T> y(raw.shape());
  std::vector<T> norms(batch);
  for (std::size_t n = 0; n < batch; ++n) {
    const T* src = raw.data() + n * d;
    T* dst = y.data() + n * d;
    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      dst[k] = signed_sqrt(src[k]);
      sq += static_cast<double>(dst[k]) * static_cast<double>(dst[k]);
    }
    const double norm = std::sqrt(sq);
    norms[n] = static_cast<T>(norm);
    if (norm >= kL2ZeroGuard) {
      const T inv = static_cast<T>(1.0 / norm);
      for (std::size_t k = 0; k < d; ++k) dst[k] *= inv;
    }
  }
  if (trace != nullptr) {
    trace->h = h;
    trace->p = p;
    trace->raw = std::move(raw);
    trace->normalized = y;
    trace->norms = std::move(norms);
    trace->recorded = true;
  }
  return y;
}

template <typename T>
struct BilinearGrads {
  nn::Tensor<T> dh;
  nn::Tensor<T> dp;
};

// The signed square root has unbounded slope at 0; entries exactly 0 get a
// zero gradient.
template <typename T>
BilinearGrads<T> bilinear_pool_backward(const nn::Tensor<T>& dy, const BilinearTrace<T>& trace) {
  if (!trace.recorded) fail(ErrorKind::NoTrace, "bilinear backward without forward trace");
  const nn::Tensor<T>& h = trace.h;
  const nn::Tensor<T>& p = trace.p;
  const std::size_t batch = h.shape().n, positions = h.shape().spatial();
  const std::size_t ch = h.shape().c, cp = p.shape().c, d = ch * cp;
  if (dy.size() != batch * d) fail(ErrorKind::ShapeMismatch, "bilinear backward gradient shape");

  BilinearGrads<T> g{nn::Tensor<T>(h.shape()), nn::Tensor<T>(p.shape())};
  std::vector<T> db(d);
  for (std::size_t n = 0; n < batch; ++n) {
    const T* gy = dy.data() + n * d;
    const T* y = trace.normalized.data() + n * d;
    const T* b = trace.raw.data() + n * d;
    const double norm = static_cast<double>(trace.norms[n]);
    double dot = 0.0;
    for (std::size_t k = 0; k < d; ++k) dot += static_cast<double>(y[k]) * static_cast<double>(gy[k]);
    for (std::size_t k = 0; k < d; ++k) {
      double dz = gy[k];
      if (norm >= kL2ZeroGuard) dz = (dz - static_cast<double>(y[k]) * dot) / norm;
      const double mag = std::abs(static_cast<double>(b[k]));
      db[k] = mag > 0.0 ? static_cast<T>(dz / (2.0 * std::sqrt(mag))) : T{};
    }
    const T* hrow = h.data() + n * positions * ch;
    const T* prow = p.data() + n * positions * cp;
    T* dhrow = g.dh.data() + n * positions * ch;
    T* dprow = g.dp.data() + n * positions * cp;
    for (std::size_t s = 0; s < positions; ++s) {
      const T* hv = hrow + s * ch;
      const T* pv = prow + s * cp;
      T* dhv = dhrow + s * ch;
      T* dpv = dprow + s * cp;
      for (std::size_t i = 0; i < ch; ++i) {
        const T* dbi = db.data() + i * cp;
        T acc{};
        for (std::size_t j = 0; j < cp; ++j) {
          acc += dbi[j] * pv[j];
          dpv[j] += hv[i] * dbi[j];
        }
        dhv[i] = acc;
      }
    }
  }
  return g;
}

}  // namespace asc
