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

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>

#include "asc/features/feature_io.hpp"
#include "asc/model/bcnn.hpp"
#include "asc/nn/adam.hpp"
#include "asc/train/manifest.hpp"
#include "asc/train/protocol.hpp"
#include "asc/train/train_config.hpp"
#include "asc/util/parallel.hpp"

namespace asc {

struct LabeledSample {
  FeaturePair features;
  std::size_t label = 0;  // index into the architecture's label list
};

// Reads `<clip_id>.feat` for every entry. Labels come from the manifest.
inline std::vector<LabeledSample> load_samples(const std::filesystem::path& features_dir, const DatasetManifest& m,
                                               const std::vector<std::string>& labels) {
  std::vector<LabeledSample> out(m.size());
  parallel_for(m.size(), [&](std::size_t i) {
    const auto& e = m.entries[i];
    const auto idx = scene_index(labels, e.label);
    if (!idx) fail(ErrorKind::UnknownLabel, "label " + e.label + " is not in the model's label set");
    out[i].features = read_feature(feature_path(features_dir, e.clip_id()));
    out[i].label = *idx;
  });
  return out;
}

// Stacks the selected samples into (B, mels, frames, 1) tensors. A stream the
// head does not use gets an empty tensor.
template <typename T>
std::pair<nn::Tensor<T>, nn::Tensor<T>> make_batch(const std::vector<LabeledSample>& samples,
                                                   std::span<const std::size_t> idx, const ArchitectureSpec& arch) {
  auto stack = [&](bool used, const StreamSpec& s, auto pick) {
    if (!used) return nn::Tensor<T>{};
    nn::Tensor<T> t({idx.size(), s.input_h, s.input_w, 1});
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const auto& g = pick(samples[idx[b]].features).values;
      if (g.rows != s.input_h || g.cols != s.input_w)
        fail(ErrorKind::ShapeMismatch, "feature " + samples[idx[b]].features.clip_id + " is " +
                                           std::to_string(g.rows) + "x" + std::to_string(g.cols) +
                                           ", model expects " + std::to_string(s.input_h) + "x" +
                                           std::to_string(s.input_w));
      std::copy(g.data.begin(), g.data.end(), t.data() + b * g.data.size());
    }
    return t;
  };
  return {stack(arch.uses_hcnn(), arch.hcnn, [](const FeaturePair& f) -> const FeatureMatrix& { return f.harmonic; }),
          stack(arch.uses_pcnn(), arch.pcnn, [](const FeaturePair& f) -> const FeatureMatrix& { return f.percussive; })};
}

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;  // rate used during this epoch
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  bool early_stopped = false;

  double best_val_loss() const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : epochs) best = std::min(best, e.val_loss);
    return best;
  }
};

inline void write_history_csv(const TrainHistory& h, std::ostream& out) {
  out << "epoch,train_loss,val_loss,lr\n";
  out << std::setprecision(17);
  for (const auto& e : h.epochs) out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.lr << '\n';
}

inline void write_history_csv(const TrainHistory& h, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  write_history_csv(h, out);
}

// Mean softmax cross-entropy over `samples`, inference mode.
template <typename T>
double mean_loss(const BcnnModel<T>& model, const std::vector<LabeledSample>& samples, std::size_t batch_size) {
  if (samples.empty()) return 0.0;
  double total = 0.0;
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::span<const std::size_t> b(idx.data() + start, std::min(batch_size, idx.size() - start));
    auto [h, p] = make_batch<T>(samples, b, model.spec());
    std::vector<std::size_t> labels;
    for (auto i : b) labels.push_back(samples[i].label);
    const auto [loss, probs] = nn::softmax_crossentropy(model.infer(h, p), labels);
    total += static_cast<double>(loss) * static_cast<double>(b.size());
  }
  return total / static_cast<double>(samples.size());
}

struct TrainResult {
  BcnnModel<float> model;
  TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&, const PlateauProtocol::Decision&)>;

// Mini-batch Adam on softmax cross-entropy with the plateau/early-stop
// protocol. Returns the weights of the epoch with the lowest validation loss.
inline TrainResult train(const std::vector<LabeledSample>& train_set, const std::vector<LabeledSample>& val_set,
                         const ArchitectureSpec& arch, const TrainConfig& cfg, const EpochCallback& on_epoch = {}) {
  cfg.validate();
  if (train_set.empty()) fail(ErrorKind::EmptyManifest, "training set is empty");
  if (val_set.empty()) fail(ErrorKind::EmptyManifest, "validation set is empty");

  BcnnModel<float> model(arch, cfg.seed);
  nn::Adam<float> adam(cfg.adam);
  PlateauProtocol protocol(cfg);
  Rng shuffle_rng(cfg.seed ^ 0x5eedba7c4ULL);
  for (auto* p : model.parameter_ptrs()) p->ensure_grad();

  auto state = model.state();
  std::vector<std::vector<float>> best_state;
  double best_val = std::numeric_limits<double>::infinity();
  auto snapshot = [&] {
    best_state.clear();
    for (const auto& t : state) best_state.emplace_back(t.tensor->values().begin(), t.tensor->values().end());
  };

  TrainHistory history;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  const auto params = model.parameter_ptrs();

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = protocol.lr();
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::span<const std::size_t> b(order.data() + start, std::min(cfg.batch_size, order.size() - start));
      auto [h, p] = make_batch<float>(train_set, b, arch);
      std::vector<std::size_t> labels;
      for (auto i : b) labels.push_back(train_set[i].label);

      typename BcnnModel<float>::Trace trace;
      const auto logits = model.forward(h, p, nn::Mode::Train, &trace);
      const auto [loss, probs] = nn::softmax_crossentropy(logits, labels);
      if (!std::isfinite(loss))
        fail(ErrorKind::NonFiniteLoss, "non-finite training loss at epoch " + std::to_string(epoch) +
                                           ", batch starting at " + std::to_string(start) + " (lr " +
                                           std::to_string(lr) + ")");
      model.zero_grad();
      model.backward(nn::softmax_crossentropy_backward(probs, labels), trace);
      adam.step(params, static_cast<float>(lr));
      loss_sum += static_cast<double>(loss) * static_cast<double>(b.size());
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train_set.size());
    rec.val_loss = mean_loss(model, val_set, cfg.batch_size);
    rec.lr = lr;
    if (!std::isfinite(rec.val_loss))
      fail(ErrorKind::NonFiniteLoss, "non-finite validation loss at epoch " + std::to_string(epoch));
    if (rec.val_loss < best_val) {
      best_val = rec.val_loss;
      history.best_epoch = epoch;
      snapshot();
    }
    const auto decision = protocol.observe(rec.val_loss);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec, decision);
    if (decision.stop) {
      history.early_stopped = true;
      break;
    }
  }

  for (std::size_t k = 0; k < state.size(); ++k)
    std::copy(best_state[k].begin(), best_state[k].end(), state[k].tensor->values().begin());
  return {std::move(model), std::move(history)};
}

inline TrainResult train(const std::filesystem::path& features_dir, const DatasetManifest& train_manifest,
                         const DatasetManifest& val_manifest, const ArchitectureSpec& arch, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {}) {
  return train(load_samples(features_dir, train_manifest, arch.labels),
               load_samples(features_dir, val_manifest, arch.labels), arch, cfg, on_epoch);
}

}  // namespace asc
