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
#include <limits>
#include <numeric>
#include <vector>

#include "asc/nn/conv.hpp"
#include "asc/nn/tensor.hpp"
#include "asc/util/parallel.hpp"

namespace asc::nn {

// Per-channel batch normalization over (batch, height, width).
template <typename T>
class BatchNorm {
 public:
  struct Trace {
    Tensor<T> normalized;
    std::vector<T> inv_std;
    Mode mode = Mode::Infer;
    bool recorded = false;
  };

  BatchNorm() = default;
  explicit BatchNorm(std::size_t channels, double eps = 1e-3, double momentum = 0.99)
      : gamma(Shape{1, 1, 1, channels}, T{1}),
        beta(Shape{1, 1, 1, channels}),
        running_mean(Shape{1, 1, 1, channels}),
        running_var(Shape{1, 1, 1, channels}, T{1}),
        eps(eps),
        momentum(momentum) {
    gamma.ensure_grad();
    beta.ensure_grad();
  }

  std::size_t channels() const { return gamma.size(); }

  // Train mode uses batch statistics and folds them into the running
  // averages: running = momentum * running + (1 - momentum) * batch.
  Tensor<T> forward(const Tensor<T>& x, Mode mode, Trace* trace = nullptr) {
    check(x);
    const std::size_t C = channels();
    const std::size_t positions = x.size() / C;
    std::vector<T> mean(C), inv_std(C);
    if (mode == Mode::Train) {
      std::vector<double> sum(C, 0.0), sq(C, 0.0);
      for (std::size_t p = 0; p < positions; ++p) {
        const T* v = x.data() + p * C;
        for (std::size_t c = 0; c < C; ++c) sum[c] += static_cast<double>(v[c]);
      }
      for (std::size_t c = 0; c < C; ++c) sum[c] /= static_cast<double>(positions);
      for (std::size_t p = 0; p < positions; ++p) {
        const T* v = x.data() + p * C;
        for (std::size_t c = 0; c < C; ++c) {
          const double d = static_cast<double>(v[c]) - sum[c];
          sq[c] += d * d;
        }
      }
      for (std::size_t c = 0; c < C; ++c) {
        const double var = sq[c] / static_cast<double>(positions);
        mean[c] = static_cast<T>(sum[c]);
        inv_std[c] = static_cast<T>(1.0 / std::sqrt(var + eps));
        running_mean[c] = static_cast<T>(momentum * running_mean[c] + (1.0 - momentum) * sum[c]);
        running_var[c] = static_cast<T>(momentum * running_var[c] + (1.0 - momentum) * var);
      }
    } else {
      for (std::size_t c = 0; c < C; ++c) {
        mean[c] = running_mean[c];
        inv_std[c] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(running_var[c]) + eps));
      }
    }
    Tensor<T> y(x.shape());
    Tensor<T> xhat;
    if (trace != nullptr) xhat = Tensor<T>(x.shape());
    for (std::size_t p = 0; p < positions; ++p) {
      const T* v = x.data() + p * C;
      T* out = y.data() + p * C;
      for (std::size_t c = 0; c < C; ++c) {
        const T h = (v[c] - mean[c]) * inv_std[c];
        if (trace != nullptr) xhat[p * C + c] = h;
        out[c] = gamma[c] * h + beta[c];
      }
    }
    if (trace != nullptr) {
      trace->normalized = std::move(xhat);
      trace->inv_std = std::move(inv_std);
      trace->mode = mode;
      trace->recorded = true;
    }
    return y;
  }

  Tensor<T> infer(const Tensor<T>& x) const {
    check(x);
    const std::size_t C = channels();
    std::vector<T> scale(C), shift(C);
    for (std::size_t c = 0; c < C; ++c) {
      const T inv = static_cast<T>(1.0 / std::sqrt(static_cast<double>(running_var[c]) + eps));
      scale[c] = gamma[c] * inv;
      shift[c] = beta[c] - running_mean[c] * scale[c];
    }
    Tensor<T> y(x.shape());
    const std::size_t positions = x.size() / C;
    for (std::size_t p = 0; p < positions; ++p) {
      const T* v = x.data() + p * C;
      T* out = y.data() + p * C;
      for (std::size_t c = 0; c < C; ++c) out[c] = v[c] * scale[c] + shift[c];
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy, const Trace& trace) {
    if (!trace.recorded) fail(ErrorKind::NoTrace, "batch norm backward without forward trace");
    const Tensor<T>& xhat = trace.normalized;
    if (dy.shape() != xhat.shape()) fail(ErrorKind::ShapeMismatch, "batch norm backward gradient shape");
    const std::size_t C = channels();
    const std::size_t positions = dy.size() / C;
    std::vector<double> sum_dy(C, 0.0), sum_dy_xhat(C, 0.0);
    for (std::size_t p = 0; p < positions; ++p) {
      const T* g = dy.data() + p * C;
      const T* h = xhat.data() + p * C;
      for (std::size_t c = 0; c < C; ++c) {
        sum_dy[c] += static_cast<double>(g[c]);
        sum_dy_xhat[c] += static_cast<double>(g[c]) * static_cast<double>(h[c]);
      }
    }
    auto ggrad = gamma.grad();
    auto bgrad = beta.grad();
    for (std::size_t c = 0; c < C; ++c) {
      ggrad[c] += static_cast<T>(sum_dy_xhat[c]);
      bgrad[c] += static_cast<T>(sum_dy[c]);
    }
    Tensor<T> dx(dy.shape());
    const double m = static_cast<double>(positions);
    for (std::size_t p = 0; p < positions; ++p) {
      const T* g = dy.data() + p * C;
      const T* h = xhat.data() + p * C;
      T* out = dx.data() + p * C;
      for (std::size_t c = 0; c < C; ++c) {
        const double scale = static_cast<double>(gamma[c]) * static_cast<double>(trace.inv_std[c]);
        if (trace.mode == Mode::Train) {
          // (1/m) * gamma * inv_std * (m*dy - sum(dy) - xhat * sum(dy*xhat))
          out[c] = static_cast<T>(scale / m *
                                  (m * g[c] - sum_dy[c] - static_cast<double>(h[c]) * sum_dy_xhat[c]));
        } else {
          out[c] = static_cast<T>(scale * g[c]);
        }
      }
    }
    return dx;
  }

  Tensor<T> gamma;
  Tensor<T> beta;
  Tensor<T> running_mean;
  Tensor<T> running_var;
  double eps = 1e-3;
  double momentum = 0.99;

 private:
  void check(const Tensor<T>& x) const {
    if (x.shape().c != channels())
      fail(ErrorKind::ChannelMismatch, "batch norm expects " + std::to_string(channels()) + " channels");
  }
};

template <typename T>
struct ReluTrace {
  Tensor<T> output;
  bool recorded = false;
};

template <typename T>
Tensor<T> relu(const Tensor<T>& x, ReluTrace<T>* trace = nullptr) {
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T{} ? x[i] : T{};
  if (trace != nullptr) {
    trace->output = y;
    trace->recorded = true;
  }
  return y;
}

// Gradient is zero wherever the output was clamped (including x == 0).
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& dy, const ReluTrace<T>& trace) {
  if (!trace.recorded) fail(ErrorKind::NoTrace, "relu backward without forward trace");
  if (dy.shape() != trace.output.shape()) fail(ErrorKind::ShapeMismatch, "relu backward gradient shape");
  Tensor<T> dx(dy.shape());
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = trace.output[i] > T{} ? dy[i] : T{};
  return dx;
}

struct PoolSpec {
  std::size_t pool_h = 2, pool_w = 2;
  std::size_t stride_h = 2, stride_w = 2;

  static PoolSpec square(std::size_t h, std::size_t w) { return {h, w, h, w}; }

  std::size_t out_h(std::size_t in) const { return (in - pool_h) / stride_h + 1; }
  std::size_t out_w(std::size_t in) const { return (in - pool_w) / stride_w + 1; }
  bool operator==(const PoolSpec&) const = default;
};

struct ArgmaxTrace {
  std::vector<std::size_t> argmax;  // flat input index per output element
  Shape input_shape;
  bool recorded = false;
};

// Unpadded max pooling; out = floor((in - pool) / stride) + 1 per axis. Ties
// resolve to the first element in row-major window order.
template <typename T>
Tensor<T> maxpool(const Tensor<T>& x, const PoolSpec& spec, ArgmaxTrace* trace = nullptr) {
  const Shape& s = x.shape();
  if (spec.pool_h < 1 || spec.pool_w < 1 || spec.stride_h < 1 || spec.stride_w < 1)
    fail(ErrorKind::InvalidArgument, "pool dims and strides must be >= 1");
  if (s.h < spec.pool_h || s.w < spec.pool_w)
    fail(ErrorKind::WindowTooLarge, "pool window larger than input " + s.str());
  const std::size_t oh = spec.out_h(s.h), ow = spec.out_w(s.w);
  Tensor<T> y(Shape{s.n, oh, ow, s.c});
  std::vector<std::size_t> arg(trace != nullptr ? y.size() : 0);
  parallel_for(s.n * oh, [&](std::size_t row) {
    const std::size_t n = row / oh, oy = row % oh;
    for (std::size_t ox = 0; ox < ow; ++ox) {
      for (std::size_t c = 0; c < s.c; ++c) {
        std::size_t best = x.index(n, oy * spec.stride_h, ox * spec.stride_w, c);
        T best_v = x[best];
        for (std::size_t a = 0; a < spec.pool_h; ++a) {
          for (std::size_t b = 0; b < spec.pool_w; ++b) {
            const std::size_t idx = x.index(n, oy * spec.stride_h + a, ox * spec.stride_w + b, c);
            if (x[idx] > best_v) {
              best_v = x[idx];
              best = idx;
            }
          }
        }
        const std::size_t out = y.index(n, oy, ox, c);
        y[out] = best_v;
        if (trace != nullptr) arg[out] = best;
      }
    }
  });
  if (trace != nullptr) {
    trace->argmax = std::move(arg);
    trace->input_shape = s;
    trace->recorded = true;
  }
  return y;
}

// Routes each output gradient to its recorded argmax.
template <typename T>
Tensor<T> argmax_backward(const Tensor<T>& dy, const ArgmaxTrace& trace) {
  if (!trace.recorded) fail(ErrorKind::NoTrace, "pool backward without forward trace");
  if (dy.size() != trace.argmax.size()) fail(ErrorKind::ShapeMismatch, "pool backward gradient shape");
  Tensor<T> dx(trace.input_shape);
  for (std::size_t i = 0; i < dy.size(); ++i) dx[trace.argmax[i]] += dy[i];
  return dx;
}

// Max over all spatial positions per channel: (N,H,W,C) -> (N,1,1,C).
template <typename T>
Tensor<T> global_maxpool(const Tensor<T>& x, ArgmaxTrace* trace = nullptr) {
  const Shape& s = x.shape();
  return maxpool(x, PoolSpec{s.h, s.w, s.h, s.w}, trace);
}

// Channel-wise concatenation in argument order.
template <typename T>
Tensor<T> depth_concat(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) fail(ErrorKind::InvalidArgument, "depth_concat of nothing");
  const Shape& s0 = parts[0].shape();
  std::size_t channels = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (s.n != s0.n || s.h != s0.h || s.w != s0.w)
      fail(ErrorKind::SpatialMismatch, "depth_concat " + s.str() + " vs " + s0.str());
    channels += s.c;
  }
  Tensor<T> y(Shape{s0.n, s0.h, s0.w, channels});
  const std::size_t positions = s0.n * s0.h * s0.w;
  for (std::size_t p = 0; p < positions; ++p) {
    T* dst = y.data() + p * channels;
    for (const auto& part : parts) {
      const std::size_t c = part.shape().c;
      std::copy_n(part.data() + p * c, c, dst);
      dst += c;
    }
  }
  return y;
}

// Inverse of depth_concat, used for its backward pass.
template <typename T>
std::vector<Tensor<T>> depth_split(const Tensor<T>& x, const std::vector<std::size_t>& channels) {
  const Shape& s = x.shape();
  if (std::accumulate(channels.begin(), channels.end(), std::size_t{0}) != s.c)
    fail(ErrorKind::ChannelMismatch, "depth_split channel counts do not sum to " + std::to_string(s.c));
  std::vector<Tensor<T>> parts;
  for (std::size_t c : channels) parts.emplace_back(Shape{s.n, s.h, s.w, c});
  const std::size_t positions = s.n * s.h * s.w;
  for (std::size_t p = 0; p < positions; ++p) {
    const T* src = x.data() + p * s.c;
    for (std::size_t i = 0; i < channels.size(); ++i) {
      std::copy_n(src, channels[i], parts[i].data() + p * channels[i]);
      src += channels[i];
    }
  }
  return parts;
}

// Affine map on flattened rows: y = x W + b, W stored (in x out).
template <typename T>
class Linear {
 public:
  struct Trace {
    Tensor<T> input;
    bool recorded = false;
  };

  Linear() = default;
  Linear(std::size_t in, std::size_t out) : weight(Shape{in, 1, 1, out}), bias(Shape{1, 1, 1, out}) {
    weight.ensure_grad();
    bias.ensure_grad();
  }

  std::size_t in_features() const { return weight.shape().n; }
  std::size_t out_features() const { return weight.shape().c; }

  Tensor<T> forward(const Tensor<T>& x, Trace* trace = nullptr) const {
    const std::size_t batch = x.shape().n;
    const std::size_t in = in_features(), out = out_features();
    if (x.size() != batch * in)
      fail(ErrorKind::DimMismatch,
           "linear expects " + std::to_string(in) + " inputs, got " + std::to_string(x.size() / batch));
    Tensor<T> y(Shape{batch, 1, 1, out});
    for (std::size_t n = 0; n < batch; ++n) {
      T* dst = y.data() + n * out;
      for (std::size_t o = 0; o < out; ++o) dst[o] = bias[o];
      const T* src = x.data() + n * in;
      for (std::size_t i = 0; i < in; ++i) {
        const T v = src[i];
        const T* w = weight.data() + i * out;
        for (std::size_t o = 0; o < out; ++o) dst[o] += v * w[o];
      }
    }
    if (trace != nullptr) {
      trace->input = x.reshaped(Shape{batch, 1, 1, in});
      trace->recorded = true;
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy, const Trace& trace) {
    if (!trace.recorded) fail(ErrorKind::NoTrace, "linear backward without forward trace");
    const Tensor<T>& x = trace.input;
    const std::size_t batch = x.shape().n, in = in_features(), out = out_features();
    if (dy.size() != batch * out) fail(ErrorKind::ShapeMismatch, "linear backward gradient shape");
    auto wgrad = weight.grad();
    auto bgrad = bias.grad();
    Tensor<T> dx(x.shape());
    for (std::size_t n = 0; n < batch; ++n) {
      const T* g = dy.data() + n * out;
      const T* src = x.data() + n * in;
      T* dsrc = dx.data() + n * in;
      for (std::size_t o = 0; o < out; ++o) bgrad[o] += g[o];
      for (std::size_t i = 0; i < in; ++i) {
        const T* w = weight.data() + i * out;
        T* gw = wgrad.data() + i * out;
        T acc{};
        for (std::size_t o = 0; o < out; ++o) {
          gw[o] += src[i] * g[o];
          acc += g[o] * w[o];
        }
        dsrc[i] = acc;
      }
    }
    return dx;
  }

  Tensor<T> weight;
  Tensor<T> bias;
};

template <typename T>
struct SoftmaxResult {
  T loss{};
  Tensor<T> probs;  // (N, 1, 1, K)
};

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  const std::size_t batch = logits.shape().n;
  const std::size_t k = logits.size() / batch;
  Tensor<T> probs(Shape{batch, 1, 1, k});
  for (std::size_t n = 0; n < batch; ++n) {
    const T* z = logits.data() + n * k;
    T* p = probs.data() + n * k;
    const T peak = *std::max_element(z, z + k);
    T total{};
    for (std::size_t j = 0; j < k; ++j) {
      p[j] = std::exp(z[j] - peak);
      total += p[j];
    }
    for (std::size_t j = 0; j < k; ++j) p[j] /= total;
  }
  return probs;
}

// Mean negative log-likelihood of the true classes under a row-wise softmax.
template <typename T>
SoftmaxResult<T> softmax_crossentropy(const Tensor<T>& logits, std::span<const std::size_t> labels) {
  const std::size_t batch = logits.shape().n;
  const std::size_t k = logits.size() / batch;
  if (labels.size() != batch) fail(ErrorKind::DimMismatch, "one label per batch row required");
  SoftmaxResult<T> out;
  out.probs = softmax(logits);
  double total = 0.0;
  for (std::size_t n = 0; n < batch; ++n) {
    if (labels[n] >= k) fail(ErrorKind::LabelOutOfRange, "label " + std::to_string(labels[n]));
    const T* z = logits.data() + n * k;
    const T peak = *std::max_element(z, z + k);
    T lse{};
    for (std::size_t j = 0; j < k; ++j) lse += std::exp(z[j] - peak);
    total += static_cast<double>(std::log(lse) + peak - z[labels[n]]);
  }
  out.loss = static_cast<T>(total / static_cast<double>(batch));
  return out;
}

// d(mean CE)/d(logits) = (probs - onehot) / N.
template <typename T>
Tensor<T> softmax_crossentropy_backward(const Tensor<T>& probs, std::span<const std::size_t> labels) {
  const std::size_t batch = probs.shape().n;
  const std::size_t k = probs.size() / batch;
  Tensor<T> d(probs.shape());
  const T inv = T{1} / static_cast<T>(batch);
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t j = 0; j < k; ++j) {
      const T target = j == labels[n] ? T{1} : T{};
      d[n * k + j] = (probs[n * k + j] - target) * inv;
    }
  }
  return d;
}

}  // namespace asc::nn
