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
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace asc {

// The ten urban scenes, in the order per-scene results are reported.
inline const std::vector<std::string>& default_scenes() {
  static const std::vector<std::string> scenes = {
      "airport", "bus",  "shopping_mall", "street_pedestrian", "street_traffic",
      "metro_station", "park", "metro", "public_square", "tram"};
  return scenes;
}

// Lower-case, trimmed, with runs of spaces/underscores/hyphens collapsed to
// a single underscore: "Shopping Mall " -> "shopping_mall".
inline std::string normalize_label(std::string_view raw) {
  std::string out;
  bool pending_sep = false;
  for (char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c) || ch == '_' || ch == '-') {
      pending_sep = !out.empty();
      continue;
    }
    if (pending_sep) out.push_back('_');
    pending_sep = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

inline std::optional<std::size_t> scene_index(const std::vector<std::string>& labels, std::string_view raw) {
  const std::string key = normalize_label(raw);
  auto it = std::find(labels.begin(), labels.end(), key);
  if (it == labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

}  // namespace asc
