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
#include <array>
#include <cassert>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "asc/util/error.hpp"

namespace asc::nn {

// NHWC shape. Lower-rank data uses leading/trailing 1s: a flat batch of
// vectors is (N, 1, 1, C).
struct Shape {
  std::size_t n = 1, h = 1, w = 1, c = 1;

  std::size_t size() const { return n * h * w * c; }
  std::size_t spatial() const { return h * w; }
  bool operator==(const Shape&) const = default;

  std::string str() const {
    return "(" + std::to_string(n) + "," + std::to_string(h) + "," + std::to_string(w) + "," +
           std::to_string(c) + ")";
  }
};

template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{}) : shape_(shape), values_(shape.size(), fill) {}
  Tensor(Shape shape, std::vector<T> values) : shape_(shape), values_(std::move(values)) {
    if (values_.size() != shape_.size()) fail(ErrorKind::ShapeMismatch, "value count does not match shape");
  }

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }

  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }
  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  std::size_t index(std::size_t n, std::size_t h, std::size_t w, std::size_t c) const {
    assert(n < shape_.n && h < shape_.h && w < shape_.w && c < shape_.c);
    return ((n * shape_.h + h) * shape_.w + w) * shape_.c + c;
  }
  T& at(std::size_t n, std::size_t h, std::size_t w, std::size_t c) { return values_[index(n, h, w, c)]; }
  const T& at(std::size_t n, std::size_t h, std::size_t w, std::size_t c) const {
    return values_[index(n, h, w, c)];
  }

  // Gradient buffer; present only on parameters (and when explicitly asked).
  bool has_grad() const { return !grad_.empty(); }
  std::span<T> grad() { return grad_; }
  std::span<const T> grad() const { return grad_; }
  void ensure_grad() {
    if (grad_.size() != values_.size()) grad_.assign(values_.size(), T{});
  }
  void zero_grad() { std::fill(grad_.begin(), grad_.end(), T{}); }

  void fill(T v) { std::fill(values_.begin(), values_.end(), v); }

  Tensor reshaped(Shape s) const {
    if (s.size() != size()) fail(ErrorKind::ShapeMismatch, "reshape " + shape_.str() + " -> " + s.str());
    Tensor out(s, values_);
    return out;
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> v(values_.begin(), values_.end());
    return Tensor<U>(shape_, std::move(v));
  }

  bool operator==(const Tensor& o) const { return shape_ == o.shape_ && values_ == o.values_; }

 private:
  Shape shape_;
  std::vector<T> values_;
  std::vector<T> grad_;
};

}  // namespace asc::nn
