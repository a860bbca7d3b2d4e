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
#include "asc/util/rng.hpp"

namespace asc::nn {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool operator==(const AdamOptions&) const = default;
};

// Adam with bias correction. Moments are kept per parameter tensor, matched
// by position in the list passed to step(), which must stay fixed.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamOptions opt = {}) : opt_(opt) {}

  void step(const std::vector<Tensor<T>*>& params, double lr) {
    if (first_.empty()) {
      for (const auto* p : params) {
        first_.emplace_back(p->size(), 0.0);
        second_.emplace_back(p->size(), 0.0);
      }
    }
    if (first_.size() != params.size()) fail(ErrorKind::InvalidArgument, "parameter list changed");
    ++t_;
    const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      Tensor<T>& p = *params[k];
      auto g = p.grad();
      if (g.size() != p.size() || first_[k].size() != p.size())
        fail(ErrorKind::ShapeMismatch, "adam parameter/gradient size mismatch");
      auto& m = first_[k];
      auto& v = second_[k];
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = static_cast<double>(g[i]);
        m[i] = opt_.beta1 * m[i] + (1.0 - opt_.beta1) * gi;
        v[i] = opt_.beta2 * v[i] + (1.0 - opt_.beta2) * gi * gi;
        const double mhat = m[i] / c1;
        const double vhat = v[i] / c2;
        p[i] = static_cast<T>(static_cast<double>(p[i]) - lr * mhat / (std::sqrt(vhat) + opt_.eps));
      }
    }
  }

  std::size_t steps() const { return t_; }
  const AdamOptions& options() const { return opt_; }
  const std::vector<std::vector<double>>& first_moments() const { return first_; }
  const std::vector<std::vector<double>>& second_moments() const { return second_; }

 private:
  AdamOptions opt_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
};

// Kaiming/He uniform: U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)).
template <typename T>
void kaiming_uniform(Tensor<T>& t, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rng.uniform(-bound, bound));
}

}  // namespace asc::nn
