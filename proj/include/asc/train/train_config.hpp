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

#include "asc/nn/adam.hpp"
#include "asc/util/error.hpp"

namespace asc {

struct TrainConfig {
  std::size_t batch_size = 16;
  std::size_t max_epochs = 200;
  std::size_t early_stop_patience = 15;
  std::size_t plateau_patience = 5;
  double lr = 1e-3;
  double lr_factor = 0.5;
  double lr_min = 1e-5;
  // A validation loss counts as an improvement only if it beats the best so
  // far by at least this much.
  double min_delta = 1e-4;
  std::uint64_t seed = 2019;
  double test_fraction = 0.3;
  // Carved out of the non-test portion for early stopping.
  double validation_fraction = 0.1;
  nn::AdamOptions adam;

  void validate() const {
    if (batch_size < 1) fail(ErrorKind::InvalidConfig, "batch_size must be >= 1");
    if (max_epochs < 1) fail(ErrorKind::InvalidConfig, "max_epochs must be >= 1");
    if (early_stop_patience < 1 || plateau_patience < 1)
      fail(ErrorKind::InvalidConfig, "patience values must be >= 1");
    if (!(lr > 0.0) || !(lr_min > 0.0) || lr_min > lr) fail(ErrorKind::InvalidConfig, "need 0 < lr_min <= lr");
    if (!(lr_factor > 0.0 && lr_factor < 1.0)) fail(ErrorKind::InvalidConfig, "lr_factor must be in (0, 1)");
    if (!(min_delta >= 0.0)) fail(ErrorKind::InvalidConfig, "min_delta must be >= 0");
    if (!(test_fraction > 0.0 && test_fraction < 1.0) ||
        !(validation_fraction > 0.0 && validation_fraction < 1.0))
      fail(ErrorKind::InvalidConfig, "split fractions must lie in (0, 1)");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.eps > 0.0))
      fail(ErrorKind::InvalidConfig, "bad Adam options");
  }

  bool operator==(const TrainConfig&) const = default;
};

}  // namespace asc
