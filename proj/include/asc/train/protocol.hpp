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
#include <limits>

#include "asc/train/train_config.hpp"

namespace asc {

// Validation-loss bookkeeping: reduce the learning rate after
// `plateau_patience` epochs without improvement, stop after
// `early_stop_patience`. The two counters are independent; the plateau
// counter restarts after each reduction.
class PlateauProtocol {
 public:
  struct Decision {
    bool improved = false;
    bool lr_reduced = false;
    bool stop = false;
    double lr = 0.0;  // rate for the next epoch
  };

  explicit PlateauProtocol(const TrainConfig& cfg)
      : plateau_patience_(cfg.plateau_patience),
        stop_patience_(cfg.early_stop_patience),
        factor_(cfg.lr_factor),
        lr_min_(cfg.lr_min),
        min_delta_(cfg.min_delta),
        lr_(cfg.lr) {}

  Decision observe(double val_loss) {
    Decision d;
    if (val_loss < best_ - min_delta_) {
      best_ = val_loss;
      plateau_wait_ = 0;
      stop_wait_ = 0;
      d.improved = true;
    } else {
      ++plateau_wait_;
      ++stop_wait_;
      if (plateau_wait_ >= plateau_patience_) {
        const double next = std::max(lr_ * factor_, lr_min_);
        if (next < lr_) {
          lr_ = next;
          d.lr_reduced = true;
        }
        plateau_wait_ = 0;
      }
      d.stop = stop_wait_ >= stop_patience_;
    }
    d.lr = lr_;
    return d;
  }

  double lr() const { return lr_; }
  double best() const { return best_; }
  std::size_t epochs_without_improvement() const { return stop_wait_; }

 private:
  std::size_t plateau_patience_;
  std::size_t stop_patience_;
  double factor_;
  double lr_min_;
  double min_delta_;
  double lr_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t plateau_wait_ = 0;
  std::size_t stop_wait_ = 0;
};

}  // namespace asc
