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

#include "asc/train/manifest.hpp"
#include "asc/train/train_config.hpp"
#include "asc/util/rng.hpp"

namespace asc {

struct ManifestSplit {
  DatasetManifest train;
  DatasetManifest validation;
  DatasetManifest test;
};

// Per-scene test/validation/train counts for a scene with n entries:
// test = floor(n * test_fraction), validation = floor((n - test) *
// validation_fraction), train = the rest.
struct SplitCounts {
  std::size_t train, validation, test;
};

inline SplitCounts split_counts(std::size_t n, const TrainConfig& cfg) {
  const auto test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * cfg.test_fraction));
  const std::size_t rest = n - test;
  const auto val = static_cast<std::size_t>(std::floor(static_cast<double>(rest) * cfg.validation_fraction));
  return {rest - val, val, test};
}

// Seeded, stratified by scene. Scenes are visited in `labels` order and each
// scene's entries are shuffled with one shared generator, so the split depends
// only on (manifest, seed, fractions).
inline ManifestSplit split_manifest(const DatasetManifest& m, const TrainConfig& cfg,
                                    const std::vector<std::string>& labels = default_scenes()) {
  if (m.empty()) fail(ErrorKind::EmptyManifest, "cannot split an empty manifest");
  Rng rng(cfg.seed);
  ManifestSplit out;
  for (const auto& scene : labels) {
    std::vector<const ManifestEntry*> group;
    for (const auto& e : m.entries) {
      if (e.label == scene) group.push_back(&e);
    }
    if (group.empty()) continue;
    const SplitCounts c = split_counts(group.size(), cfg);
    if (c.train == 0 || c.validation == 0 || c.test == 0)
      fail(ErrorKind::SceneTooSmall, "scene " + scene + " has " + std::to_string(group.size()) +
                                         " entries; every partition needs at least one");
    rng.shuffle(group);
    std::size_t i = 0;
    for (; i < c.test; ++i) out.test.entries.push_back(*group[i]);
    for (; i < c.test + c.validation; ++i) out.validation.entries.push_back(*group[i]);
    for (; i < group.size(); ++i) out.train.entries.push_back(*group[i]);
  }
  return out;
}

}  // namespace asc
