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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "asc/model/architecture.hpp"
#include "asc/model/bilinear.hpp"
#include "asc/nn/adam.hpp"
#include "asc/nn/layers.hpp"
#include "asc/util/rng.hpp"

namespace asc {

template <typename T>
struct NamedTensor {
  std::string name;
  nn::Tensor<T>* tensor;
};

// Inception-style stream: branches of conv + BN + ReLU, depth concat,
// optional max pool, conv2 + BN + ReLU, optional max pool.
template <typename T>
class Stream {
 public:
  struct Branch {
    nn::Conv2d<T> conv;
    nn::BatchNorm<T> bn;
  };

  struct Trace {
    std::vector<typename nn::Conv2d<T>::Trace> conv;
    std::vector<typename nn::BatchNorm<T>::Trace> bn;
    std::vector<nn::ReluTrace<T>> relu;
    nn::Shape concat_shape;
    nn::ArgmaxTrace pool1;
    typename nn::Conv2d<T>::Trace conv2;
    typename nn::BatchNorm<T>::Trace bn2;
    nn::ReluTrace<T> relu2;
    nn::ArgmaxTrace pool2;
    bool recorded = false;
  };

  Stream() = default;
  Stream(const StreamSpec& spec, double bn_eps, double bn_momentum) : spec_(spec) {
    for (const auto& b : spec.branches)
      branches_.push_back({nn::Conv2d<T>(1, b.filters, b.kernel_h, b.kernel_w),
                           nn::BatchNorm<T>(b.filters, bn_eps, bn_momentum)});
    conv2_ = nn::Conv2d<T>(spec.concat_channels(), spec.conv2.filters, spec.conv2.kernel_h, spec.conv2.kernel_w);
    bn2_ = nn::BatchNorm<T>(spec.conv2.filters, bn_eps, bn_momentum);
  }

  const StreamSpec& spec() const { return spec_; }

  void init(Rng& rng) {
    for (auto& b : branches_) {
      nn::kaiming_uniform(b.conv.weight, b.conv.kernel_h() * b.conv.kernel_w() * b.conv.in_channels(), rng);
      b.conv.bias.fill(T{});
    }
    nn::kaiming_uniform(conv2_.weight, conv2_.kernel_h() * conv2_.kernel_w() * conv2_.in_channels(), rng);
    conv2_.bias.fill(T{});
  }

  // x is (N, input_h, input_w, 1).
  nn::Tensor<T> forward(const nn::Tensor<T>& x, nn::Mode mode, Trace* trace = nullptr) {
    check_input(x);
    if (trace != nullptr) {
      *trace = Trace{};
      trace->conv.resize(branches_.size());
      trace->bn.resize(branches_.size());
      trace->relu.resize(branches_.size());
    }
    std::vector<nn::Tensor<T>> parts;
    parts.reserve(branches_.size());
    for (std::size_t i = 0; i < branches_.size(); ++i) {
      auto& br = branches_[i];
      auto y = br.conv.forward(x, trace ? &trace->conv[i] : nullptr);
      y = br.bn.forward(y, mode, trace ? &trace->bn[i] : nullptr);
      parts.push_back(nn::relu(y, trace ? &trace->relu[i] : nullptr));
    }
    auto y = nn::depth_concat(parts);
    parts.clear();
    if (trace != nullptr) trace->concat_shape = y.shape();
    if (spec_.pool_after_concat) y = nn::maxpool(y, *spec_.pool_after_concat, trace ? &trace->pool1 : nullptr);
    y = conv2_.forward(y, trace ? &trace->conv2 : nullptr);
    y = bn2_.forward(y, mode, trace ? &trace->bn2 : nullptr);
    y = nn::relu(y, trace ? &trace->relu2 : nullptr);
    if (spec_.pool_after_conv2) y = nn::maxpool(y, *spec_.pool_after_conv2, trace ? &trace->pool2 : nullptr);
    if (trace != nullptr) trace->recorded = true;
    return y;
  }

  // Inference with running statistics; does not modify the stream.
  nn::Tensor<T> infer(const nn::Tensor<T>& x) const {
    check_input(x);
    std::vector<nn::Tensor<T>> parts;
    parts.reserve(branches_.size());
    for (const auto& br : branches_) parts.push_back(nn::relu(br.bn.infer(br.conv.forward(x))));
    auto y = nn::depth_concat(parts);
    parts.clear();
    if (spec_.pool_after_concat) y = nn::maxpool(y, *spec_.pool_after_concat);
    y = nn::relu(bn2_.infer(conv2_.forward(y)));
    if (spec_.pool_after_conv2) y = nn::maxpool(y, *spec_.pool_after_conv2);
    return y;
  }

  // Accumulates parameter gradients; returns dL/dx.
  nn::Tensor<T> backward(const nn::Tensor<T>& dy, const Trace& trace) {
    if (!trace.recorded) fail(ErrorKind::NoTrace, "stream backward without forward trace");
    nn::Tensor<T> g = dy;
    if (spec_.pool_after_conv2) g = nn::argmax_backward(g, trace.pool2);
    g = nn::relu_backward(g, trace.relu2);
    g = bn2_.backward(g, trace.bn2);
    g = conv2_.backward(g, trace.conv2);
    if (spec_.pool_after_concat) g = nn::argmax_backward(g, trace.pool1);
    std::vector<std::size_t> channels;
    for (const auto& b : branches_) channels.push_back(b.conv.out_channels());
    auto parts = nn::depth_split(g, channels);
    nn::Tensor<T> dx;
    for (std::size_t i = 0; i < branches_.size(); ++i) {
      auto gi = nn::relu_backward(parts[i], trace.relu[i]);
      gi = branches_[i].bn.backward(gi, trace.bn[i]);
      gi = branches_[i].conv.backward(gi, trace.conv[i]);
      if (i == 0) {
        dx = std::move(gi);
      } else {
        for (std::size_t k = 0; k < dx.size(); ++k) dx[k] += gi[k];
      }
    }
    return dx;
  }

  void collect(const std::string& prefix, std::vector<NamedTensor<T>>& params,
               std::vector<NamedTensor<T>>& buffers) {
    for (std::size_t i = 0; i < branches_.size(); ++i) {
      const std::string p = prefix + ".branch" + std::to_string(i);
      params.push_back({p + ".conv.weight", &branches_[i].conv.weight});
      params.push_back({p + ".conv.bias", &branches_[i].conv.bias});
      params.push_back({p + ".bn.gamma", &branches_[i].bn.gamma});
      params.push_back({p + ".bn.beta", &branches_[i].bn.beta});
      buffers.push_back({p + ".bn.running_mean", &branches_[i].bn.running_mean});
      buffers.push_back({p + ".bn.running_var", &branches_[i].bn.running_var});
    }
    params.push_back({prefix + ".conv2.weight", &conv2_.weight});
    params.push_back({prefix + ".conv2.bias", &conv2_.bias});
    params.push_back({prefix + ".bn2.gamma", &bn2_.gamma});
    params.push_back({prefix + ".bn2.beta", &bn2_.beta});
    buffers.push_back({prefix + ".bn2.running_mean", &bn2_.running_mean});
    buffers.push_back({prefix + ".bn2.running_var", &bn2_.running_var});
  }

 private:
  void check_input(const nn::Tensor<T>& x) const {
    const auto& s = x.shape();
    if (s.h != spec_.input_h || s.w != spec_.input_w || s.c != 1)
      fail(ErrorKind::ShapeMismatch, "stream expects (N," + std::to_string(spec_.input_h) + "," +
                                         std::to_string(spec_.input_w) + ",1), got " + s.str());
  }

  StreamSpec spec_;
  std::vector<Branch> branches_;
  nn::Conv2d<T> conv2_;
  nn::BatchNorm<T> bn2_;
};

// Two-stream classifier. With HeadKind::Bilinear the stream outputs are fused
// by bilinear pooling; the single-stream heads use global max pooling.
// Returns logits; softmax is applied by the loss or by predict_proba().
template <typename T>
class BcnnModel {
 public:
  struct Trace {
    typename Stream<T>::Trace hcnn, pcnn;
    nn::Tensor<T> hcnn_out, pcnn_out;
    BilinearTrace<T> bilinear;
    nn::ArgmaxTrace global_pool;
    typename nn::Linear<T>::Trace classifier;
    bool recorded = false;
  };

  explicit BcnnModel(ArchitectureSpec spec, std::uint64_t seed = 0) : spec_(std::move(spec)) {
    spec_.validate();
    if (spec_.uses_hcnn()) hcnn_.emplace(spec_.hcnn, spec_.bn_eps, spec_.bn_momentum);
    if (spec_.uses_pcnn()) pcnn_.emplace(spec_.pcnn, spec_.bn_eps, spec_.bn_momentum);
    classifier_ = nn::Linear<T>(spec_.classifier_inputs(), spec_.classes());
    Rng rng(seed);
    if (hcnn_) hcnn_->init(rng);
    if (pcnn_) pcnn_->init(rng);
    nn::kaiming_uniform(classifier_.weight, classifier_.in_features(), rng);
    classifier_.bias.fill(T{});
  }

  const ArchitectureSpec& spec() const { return spec_; }
  nn::Linear<T>& classifier() { return classifier_; }
  const nn::Linear<T>& classifier() const { return classifier_; }
  Stream<T>* hcnn() { return hcnn_ ? &*hcnn_ : nullptr; }
  Stream<T>* pcnn() { return pcnn_ ? &*pcnn_ : nullptr; }

  // Training-capable forward; Mode::Train updates BN running statistics.
  nn::Tensor<T> forward(const nn::Tensor<T>& harmonic, const nn::Tensor<T>& percussive, nn::Mode mode,
                        Trace* trace = nullptr) {
    if (trace != nullptr) *trace = Trace{};
    nn::Tensor<T> h, p;
    if (hcnn_) h = hcnn_->forward(harmonic, mode, trace ? &trace->hcnn : nullptr);
    if (pcnn_) p = pcnn_->forward(percussive, mode, trace ? &trace->pcnn : nullptr);
    auto logits = head(h, p, trace);
    if (trace != nullptr) {
      trace->hcnn_out = std::move(h);
      trace->pcnn_out = std::move(p);
      trace->recorded = true;
    }
    return logits;
  }

  nn::Tensor<T> infer(const nn::Tensor<T>& harmonic, const nn::Tensor<T>& percussive) const {
    nn::Tensor<T> h, p;
    if (hcnn_) h = hcnn_->infer(harmonic);
    if (pcnn_) p = pcnn_->infer(percussive);
    return head(h, p, nullptr);
  }

  nn::Tensor<T> predict_proba(const nn::Tensor<T>& harmonic, const nn::Tensor<T>& percussive) const {
    return nn::softmax(infer(harmonic, percussive));
  }

  void backward(const nn::Tensor<T>& dlogits, const Trace& trace) {
    if (!trace.recorded) fail(ErrorKind::NoTrace, "model backward without forward trace");
    auto g = classifier_.backward(dlogits, trace.classifier);
    switch (spec_.head) {
      case HeadKind::Bilinear: {
        auto grads = bilinear_pool_backward(g, trace.bilinear);
        hcnn_->backward(grads.dh, trace.hcnn);
        pcnn_->backward(grads.dp, trace.pcnn);
        break;
      }
      case HeadKind::HarmonicOnly:
        hcnn_->backward(nn::argmax_backward(g, trace.global_pool), trace.hcnn);
        break;
      case HeadKind::PercussiveOnly:
        pcnn_->backward(nn::argmax_backward(g, trace.global_pool), trace.pcnn);
        break;
    }
  }

  // Trainable tensors, in a fixed order shared by the optimizer and files.
  std::vector<NamedTensor<T>> parameters() { return collect().first; }
  // Running statistics (serialized, not trained).
  std::vector<NamedTensor<T>> buffers() { return collect().second; }

  std::vector<NamedTensor<T>> state() {
    auto [params, buffers] = collect();
    params.insert(params.end(), buffers.begin(), buffers.end());
    return params;
  }

  std::vector<nn::Tensor<T>*> parameter_ptrs() {
    std::vector<nn::Tensor<T>*> out;
    for (auto& p : parameters()) out.push_back(p.tensor);
    return out;
  }

  void zero_grad() {
    for (auto& p : parameters()) p.tensor->zero_grad();
  }

 private:
  nn::Tensor<T> head(const nn::Tensor<T>& h, const nn::Tensor<T>& p, Trace* trace) const {
    nn::Tensor<T> feature;
    switch (spec_.head) {
      case HeadKind::Bilinear:
        feature = bilinear_pool(h, p, trace ? &trace->bilinear : nullptr);
        break;
      case HeadKind::HarmonicOnly:
        feature = nn::global_maxpool(h, trace ? &trace->global_pool : nullptr);
        break;
      case HeadKind::PercussiveOnly:
        feature = nn::global_maxpool(p, trace ? &trace->global_pool : nullptr);
        break;
    }
    return classifier_.forward(feature, trace ? &trace->classifier : nullptr);
  }

  std::pair<std::vector<NamedTensor<T>>, std::vector<NamedTensor<T>>> collect() {
    std::vector<NamedTensor<T>> params, buffers;
    if (hcnn_) hcnn_->collect("hcnn", params, buffers);
    if (pcnn_) pcnn_->collect("pcnn", params, buffers);
    params.push_back({"classifier.weight", &classifier_.weight});
    params.push_back({"classifier.bias", &classifier_.bias});
    return {params, buffers};
  }

  ArchitectureSpec spec_;
  std::optional<Stream<T>> hcnn_;
  std::optional<Stream<T>> pcnn_;
  nn::Linear<T> classifier_;
};

// Single-stream ablation head on its own: global max over positions, then
// linear + softmax.
template <typename T>
nn::Tensor<T> single_stream_head(const nn::Tensor<T>& stream_out, const nn::Linear<T>& classifier) {
  return nn::softmax(classifier.forward(nn::global_maxpool(stream_out)));
}

// Fused bilinear feature -> linear + softmax.
template <typename T>
nn::Tensor<T> classify(const nn::Tensor<T>& feature, const nn::Linear<T>& classifier) {
  return nn::softmax(classifier.forward(feature));
}

}  // namespace asc
