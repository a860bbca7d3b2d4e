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

#include <filesystem>
#include <fstream>
#include <optional>

#include "asc/config.hpp"
#include "asc/train/trainer.hpp"

namespace asc {

struct Metrics {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::size_t sample_count = 0;

  std::size_t correct() const {
    std::size_t c = 0;
    for (std::size_t k = 0; k < confusion.size(); ++k) c += confusion[k][k];
    return c;
  }
  double overall_accuracy() const {
    return sample_count == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(sample_count);
  }
  std::size_t scene_count(std::size_t k) const {
    std::size_t n = 0;
    for (auto v : confusion[k]) n += v;
    return n;
  }
  // Empty when the scene has no samples.
  std::optional<double> scene_accuracy(std::size_t k) const {
    const auto n = scene_count(k);
    if (n == 0) return std::nullopt;
    return static_cast<double>(confusion[k][k]) / static_cast<double>(n);
  }
};

inline Metrics metrics_from_predictions(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                                        const std::vector<std::string>& labels) {
  if (truth.size() != predicted.size()) fail(ErrorKind::DimMismatch, "truth/prediction length mismatch");
  Metrics m;
  m.labels = labels;
  m.confusion.assign(labels.size(), std::vector<std::size_t>(labels.size(), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= labels.size() || predicted[i] >= labels.size())
      fail(ErrorKind::LabelOutOfRange, "class index out of range");
    ++m.confusion[truth[i]][predicted[i]];
  }
  m.sample_count = truth.size();
  return m;
}

// Index of the largest value; the first one wins ties.
template <typename T>
std::size_t argmax_row(const nn::Tensor<T>& probs, std::size_t row) {
  const std::size_t k = probs.shape().c;
  const T* p = probs.data() + row * k;
  return static_cast<std::size_t>(std::max_element(p, p + k) - p);
}

template <typename T>
std::vector<std::size_t> predict_classes(const BcnnModel<T>& model, const std::vector<LabeledSample>& samples,
                                         std::size_t batch_size = 16) {
  std::vector<std::size_t> out(samples.size());
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::span<const std::size_t> b(idx.data() + start, std::min(batch_size, idx.size() - start));
    auto [h, p] = make_batch<T>(samples, b, model.spec());
    const auto logits = model.infer(h, p);
    for (std::size_t r = 0; r < b.size(); ++r) out[start + r] = argmax_row(logits, r);
  }
  return out;
}

template <typename T>
Metrics evaluate(const BcnnModel<T>& model, const std::vector<LabeledSample>& samples, std::size_t batch_size = 16) {
  const auto predicted = predict_classes(model, samples, batch_size);
  std::vector<std::size_t> truth;
  for (const auto& s : samples) truth.push_back(s.label);
  return metrics_from_predictions(truth, predicted, model.spec().labels);
}

template <typename T>
Metrics evaluate(const BcnnModel<T>& model, const std::filesystem::path& features_dir, const DatasetManifest& m,
                 std::size_t batch_size = 16) {
  return evaluate(model, load_samples(features_dir, m, model.spec().labels), batch_size);
}

inline Json metrics_to_json(const Metrics& m) {
  Json per_scene = Json::array();
  for (std::size_t k = 0; k < m.labels.size(); ++k) {
    const auto acc = m.scene_accuracy(k);
    per_scene.push_back({{"scene", m.labels[k]},
                         {"accuracy", acc ? Json(*acc) : Json(nullptr)},
                         {"samples", m.scene_count(k)},
                         {"correct", m.confusion[k][k]}});
  }
  Json report;
  report["labels"] = m.labels;
  report["overall_accuracy"] = m.overall_accuracy();
  report["sample_count"] = m.sample_count;
  report["per_scene"] = per_scene;
  report["confusion_matrix"] = m.confusion;
  return report;
}

inline void write_report(const Metrics& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << metrics_to_json(m).dump(2) << '\n';
}

}  // namespace asc
