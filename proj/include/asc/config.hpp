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
#include <set>
#include <string>

#include "json.hpp"

#include "asc/features/extract.hpp"
#include "asc/model/architecture.hpp"
#include "asc/train/train_config.hpp"

// JSON mapping for every configuration type. Readers are strict: unknown keys
// are rejected, absent keys keep their defaults.
namespace asc {

using Json = nlohmann::json;

namespace config_detail {

class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(ErrorKind::InvalidConfig, path_ + ": expected an object");
  }

  // Rejects keys that were never asked for.
  void done() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) fail(ErrorKind::InvalidConfig, path_ + ": unknown key \"" + key + "\"");
    }
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (const Json* v = find(key)) {
      try {
        out = v->get<T>();
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvalidConfig, where(key) + ": " + e.what());
      }
    }
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline Json pool_to_json(const std::optional<nn::PoolSpec>& p) {
  if (!p) return nullptr;
  return {{"size", {p->pool_h, p->pool_w}}, {"stride", {p->stride_h, p->stride_w}}};
}

inline std::optional<nn::PoolSpec> pool_from_json(const Json& j, const std::string& path) {
  if (j.is_null()) return std::nullopt;
  ObjectReader r(j, path);
  std::array<std::size_t, 2> size{0, 0};
  r.get("size", size);
  std::array<std::size_t, 2> stride = size;
  r.get("stride", stride);
  r.done();
  return nn::PoolSpec{size[0], size[1], stride[0], stride[1]};
}

inline Json conv_to_json(const ConvSpec& c) { return Json::array({c.filters, c.kernel_h, c.kernel_w}); }

inline ConvSpec conv_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3)
    fail(ErrorKind::InvalidConfig, path + ": expected [filters, kernel_h, kernel_w]");
  try {
    return {j[0].get<std::size_t>(), j[1].get<std::size_t>(), j[2].get<std::size_t>()};
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidConfig, path + ": " + e.what());
  }
}

inline const char* orientation_name(KernelOrientation o) {
  switch (o) {
    case KernelOrientation::Horizontal: return "horizontal";
    case KernelOrientation::Vertical: return "vertical";
    case KernelOrientation::Any: return "any";
  }
  return "any";
}

inline Json stft_to_json(const StftConfig& s) {
  return {{"window", s.window_len}, {"hop", s.hop_len}, {"fft", s.fft_len}, {"center", s.center}};
}

inline void biased_from_json(const Json& j, const std::string& path, BiasedConfig& b) {
  ObjectReader r(j, path);
  r.get("window", b.stft.window_len);
  r.get("hop", b.stft.hop_len);
  r.get("fft", b.stft.fft_len);
  r.get("center", b.stft.center);
  r.get("n_mels", b.n_mels);
  r.get("frames", b.frames);
  r.get("f_min", b.f_min);
  r.get("f_max", b.f_max);
  r.done();
}

inline Json biased_to_json(const BiasedConfig& b) {
  Json j = stft_to_json(b.stft);
  j["n_mels"] = b.n_mels;
  j["frames"] = b.frames;
  j["f_min"] = b.f_min;
  j["f_max"] = b.f_max;
  return j;
}

}  // namespace config_detail

inline Json to_json(const DspConfig& d) {
  using namespace config_detail;
  return {{"sample_rate", d.sample_rate},
          {"clip_seconds", d.clip_seconds},
          {"duration_tolerance", d.duration_tolerance},
          {"power_exponent", d.power_exponent},
          {"time_biased", biased_to_json(d.time_biased)},
          {"frequency_biased", biased_to_json(d.frequency_biased)},
          {"harmonic_kernel", {d.harmonic_kernel.height, d.harmonic_kernel.width}},
          {"percussive_kernel", {d.percussive_kernel.height, d.percussive_kernel.width}},
          {"db_floor", d.log.floor},
          {"top_db", d.log.top_db}};
}

inline DspConfig dsp_from_json(const Json& j, const std::string& path = "dsp") {
  using namespace config_detail;
  DspConfig d;
  ObjectReader r(j, path);
  r.get("sample_rate", d.sample_rate);
  r.get("clip_seconds", d.clip_seconds);
  r.get("duration_tolerance", d.duration_tolerance);
  r.get("power_exponent", d.power_exponent);
  if (const Json* v = r.find("time_biased")) biased_from_json(*v, r.where("time_biased"), d.time_biased);
  if (const Json* v = r.find("frequency_biased"))
    biased_from_json(*v, r.where("frequency_biased"), d.frequency_biased);
  std::array<std::size_t, 2> hk{d.harmonic_kernel.height, d.harmonic_kernel.width};
  std::array<std::size_t, 2> pk{d.percussive_kernel.height, d.percussive_kernel.width};
  r.get("harmonic_kernel", hk);
  r.get("percussive_kernel", pk);
  d.harmonic_kernel = {hk[0], hk[1]};
  d.percussive_kernel = {pk[0], pk[1]};
  r.get("db_floor", d.log.floor);
  r.get("top_db", d.log.top_db);
  r.done();
  return d;
}

inline Json to_json(const StreamSpec& s) {
  using namespace config_detail;
  Json branches = Json::array();
  for (const auto& b : s.branches) branches.push_back(conv_to_json(b));
  return {{"input", {s.input_h, s.input_w}},
          {"branches", branches},
          {"pool1", pool_to_json(s.pool_after_concat)},
          {"conv2", conv_to_json(s.conv2)},
          {"pool2", pool_to_json(s.pool_after_conv2)},
          {"orientation", orientation_name(s.orientation)}};
}

inline void stream_from_json(const Json& j, const std::string& path, StreamSpec& s) {
  using namespace config_detail;
  ObjectReader r(j, path);
  std::array<std::size_t, 2> input{s.input_h, s.input_w};
  r.get("input", input);
  s.input_h = input[0];
  s.input_w = input[1];
  if (const Json* v = r.find("branches")) {
    if (!v->is_array()) fail(ErrorKind::InvalidConfig, r.where("branches") + ": expected an array");
    s.branches.clear();
    for (std::size_t i = 0; i < v->size(); ++i)
      s.branches.push_back(conv_from_json((*v)[i], r.where("branches") + "[" + std::to_string(i) + "]"));
  }
  if (const Json* v = r.find("pool1")) s.pool_after_concat = pool_from_json(*v, r.where("pool1"));
  if (const Json* v = r.find("conv2")) s.conv2 = conv_from_json(*v, r.where("conv2"));
  if (const Json* v = r.find("pool2")) s.pool_after_conv2 = pool_from_json(*v, r.where("pool2"));
  if (const Json* v = r.find("orientation")) {
    const std::string o = v->is_string() ? v->get<std::string>() : "";
    if (o == "horizontal") {
      s.orientation = KernelOrientation::Horizontal;
    } else if (o == "vertical") {
      s.orientation = KernelOrientation::Vertical;
    } else if (o == "any") {
      s.orientation = KernelOrientation::Any;
    } else {
      fail(ErrorKind::InvalidConfig, r.where("orientation") + ": expected horizontal|vertical|any");
    }
  }
  r.done();
}

inline const char* head_name(HeadKind h) {
  switch (h) {
    case HeadKind::Bilinear: return "bilinear";
    case HeadKind::HarmonicOnly: return "hcnn_only";
    case HeadKind::PercussiveOnly: return "pcnn_only";
  }
  return "bilinear";
}

inline Json to_json(const ArchitectureSpec& a) {
  return {{"hcnn", to_json(a.hcnn)},     {"pcnn", to_json(a.pcnn)},
          {"head", head_name(a.head)},   {"bn_eps", a.bn_eps},
          {"bn_momentum", a.bn_momentum}, {"labels", a.labels}};
}

// Missing stream keys fall back to the defaults() architecture.
inline ArchitectureSpec architecture_from_json(const Json& j, const std::string& path = "architecture") {
  using namespace config_detail;
  ArchitectureSpec a = ArchitectureSpec::defaults();
  ObjectReader r(j, path);
  if (const Json* v = r.find("hcnn")) stream_from_json(*v, r.where("hcnn"), a.hcnn);
  if (const Json* v = r.find("pcnn")) stream_from_json(*v, r.where("pcnn"), a.pcnn);
  if (const Json* v = r.find("head")) {
    const std::string h = v->is_string() ? v->get<std::string>() : "";
    if (h == "bilinear") {
      a.head = HeadKind::Bilinear;
    } else if (h == "hcnn_only") {
      a.head = HeadKind::HarmonicOnly;
    } else if (h == "pcnn_only") {
      a.head = HeadKind::PercussiveOnly;
    } else {
      fail(ErrorKind::InvalidConfig, r.where("head") + ": expected bilinear|hcnn_only|pcnn_only");
    }
  }
  r.get("bn_eps", a.bn_eps);
  r.get("bn_momentum", a.bn_momentum);
  r.get("labels", a.labels);
  for (auto& l : a.labels) l = normalize_label(l);
  r.done();
  return a;
}

inline Json to_json(const TrainConfig& t) {
  return {{"batch_size", t.batch_size},
          {"max_epochs", t.max_epochs},
          {"early_stop_patience", t.early_stop_patience},
          {"plateau_patience", t.plateau_patience},
          {"lr", t.lr},
          {"lr_factor", t.lr_factor},
          {"lr_min", t.lr_min},
          {"min_delta", t.min_delta},
          {"seed", t.seed},
          {"test_fraction", t.test_fraction},
          {"validation_fraction", t.validation_fraction},
          {"adam", {{"beta1", t.adam.beta1}, {"beta2", t.adam.beta2}, {"eps", t.adam.eps}}}};
}

inline TrainConfig train_from_json(const Json& j, const std::string& path = "training") {
  using config_detail::ObjectReader;
  TrainConfig t;
  ObjectReader r(j, path);
  r.get("batch_size", t.batch_size);
  r.get("max_epochs", t.max_epochs);
  r.get("early_stop_patience", t.early_stop_patience);
  r.get("plateau_patience", t.plateau_patience);
  r.get("lr", t.lr);
  r.get("lr_factor", t.lr_factor);
  r.get("lr_min", t.lr_min);
  r.get("min_delta", t.min_delta);
  r.get("seed", t.seed);
  r.get("test_fraction", t.test_fraction);
  r.get("validation_fraction", t.validation_fraction);
  if (const Json* v = r.find("adam")) {
    ObjectReader a(*v, r.where("adam"));
    a.get("beta1", t.adam.beta1);
    a.get("beta2", t.adam.beta2);
    a.get("eps", t.adam.eps);
    a.done();
  }
  r.done();
  return t;
}

// Everything a run needs: front end, network and training protocol.
struct PipelineConfig {
  DspConfig dsp;
  ArchitectureSpec architecture = ArchitectureSpec::defaults();
  TrainConfig training;

  void validate() const {
    dsp.validate();
    architecture.validate();
    training.validate();
    const auto& h = architecture.hcnn;
    const auto& p = architecture.pcnn;
    if (architecture.uses_hcnn() &&
        (h.input_h != dsp.time_biased.n_mels || h.input_w != dsp.time_biased.frames))
      fail(ErrorKind::InvalidConfig, "hcnn input does not match the time-biased feature shape");
    if (architecture.uses_pcnn() &&
        (p.input_h != dsp.frequency_biased.n_mels || p.input_w != dsp.frequency_biased.frames))
      fail(ErrorKind::InvalidConfig, "pcnn input does not match the frequency-biased feature shape");
  }
};

inline Json to_json(const PipelineConfig& c) {
  return {{"dsp", to_json(c.dsp)}, {"architecture", to_json(c.architecture)}, {"training", to_json(c.training)}};
}

inline PipelineConfig pipeline_from_json(const Json& j) {
  using config_detail::ObjectReader;
  PipelineConfig c;
  {
    ObjectReader r(j, "config");
    if (const Json* v = r.find("dsp")) c.dsp = dsp_from_json(*v);
    if (const Json* v = r.find("architecture")) c.architecture = architecture_from_json(*v);
    if (const Json* v = r.find("training")) c.training = train_from_json(*v);
    r.done();
  }
  c.validate();
  return c;
}

inline PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidConfig, path.string() + ": " + e.what());
  }
  return pipeline_from_json(j);
}

// What a model file records about how it was built: the network and the
// front end that produces its inputs.
struct ModelSpec {
  ArchitectureSpec architecture = ArchitectureSpec::defaults();
  DspConfig dsp;
};

inline Json to_json(const ModelSpec& m) {
  return {{"architecture", to_json(m.architecture)}, {"dsp", to_json(m.dsp)}};
}

inline ModelSpec model_spec_from_json(const Json& j) {
  using config_detail::ObjectReader;
  ModelSpec m;
  ObjectReader r(j, "model");
  if (const Json* v = r.find("architecture")) m.architecture = architecture_from_json(*v);
  if (const Json* v = r.find("dsp")) m.dsp = dsp_from_json(*v);
  r.done();
  return m;
}

// Canonical text (sorted keys, no whitespace) hashed into model files.
inline std::string canonical_json(const ModelSpec& m) { return to_json(m).dump(); }

}  // namespace asc
