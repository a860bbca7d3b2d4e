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

#include <array>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <map>
#include <optional>

#include "asc/config.hpp"
#include "asc/model/bcnn.hpp"
#include "asc/util/binary_io.hpp"

// Model container, little-endian throughout:
//
//   magic "BCNN" | u32 format version
//   str spec_json | 64 ASCII hex chars: SHA-256 of spec_json
//   u32 tensor count, then per tensor:
//     str name | u8 rank (4) | u32 dims[4] (N,H,W,C) | u8 dtype (0 = f32) | u64 payload offset
//   f32 payloads, back to back, in directory order
//   u32 CRC-32 of all preceding bytes
//
// spec_json is the canonical ModelSpec text; "str" is u32 length + bytes.
namespace asc {

inline constexpr std::array<char, 4> kModelMagic = {'B', 'C', 'N', 'N'};
inline constexpr std::uint32_t kModelVersion = 1;

inline std::string spec_hash(const ModelSpec& spec) { return bin::sha256_hex(canonical_json(spec)); }

template <typename T>
std::vector<std::uint8_t> encode_model(BcnnModel<T>& model, const DspConfig& dsp) {
  const ModelSpec spec{model.spec(), dsp};
  const std::string json = canonical_json(spec);
  const std::string hash = bin::sha256_hex(json);

  bin::Writer w;
  w.put_bytes(std::span(reinterpret_cast<const std::uint8_t*>(kModelMagic.data()), 4));
  w.put<std::uint32_t>(kModelVersion);
  w.put_string(json);
  w.put_bytes(std::span(reinterpret_cast<const std::uint8_t*>(hash.data()), hash.size()));

  auto tensors = model.state();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
  std::uint64_t offset = 0;
  for (const auto& t : tensors) {
    const auto& s = t.tensor->shape();
    w.put_string(t.name);
    w.put<std::uint8_t>(4);
    for (std::size_t d : {s.n, s.h, s.w, s.c}) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
    w.put<std::uint8_t>(0);
    w.put<std::uint64_t>(offset);
    offset += s.size() * sizeof(float);
  }
  for (const auto& t : tensors) {
    std::vector<float> payload(t.tensor->size());
    for (std::size_t i = 0; i < payload.size(); ++i) {
      const auto v = static_cast<float>((*t.tensor)[i]);
      if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "non-finite value in " + t.name);
      payload[i] = v;
    }
    w.put_floats(payload);
  }
  w.seal();
  return w.bytes();
}

template <typename T>
void save_model(BcnnModel<T>& model, const DspConfig& dsp, const std::filesystem::path& path) {
  bin::Writer w;
  w.put_bytes(encode_model(model, dsp));
  w.save(path);
}

template <typename T>
struct LoadedModel {
  BcnnModel<T> model;
  ModelSpec spec;
};

// Decodes a container. When `expected` is given, its hash must equal the
// file's recorded spec hash.
template <typename T = float>
LoadedModel<T> decode_model(std::span<const std::uint8_t> bytes, const std::optional<ModelSpec>& expected = {}) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kModelMagic.data(), 4) != 0)
    fail(ErrorKind::CorruptFile, "not a BCNN model file");
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + 4, 4);
  if (version != kModelVersion)
    fail(ErrorKind::VersionMismatch,
         "model format version " + std::to_string(version) + ", expected " + std::to_string(kModelVersion));
  const auto body = bin::verify_sealed(bytes);
  bin::Reader in(body);
  in.get_bytes(8);
  const std::string json = in.get_string();
  const auto raw_hash = in.get_bytes(64);
  const std::string hash(raw_hash.begin(), raw_hash.end());
  if (bin::sha256_hex(json) != hash) fail(ErrorKind::CorruptFile, "spec hash does not match spec text");
  if (expected && spec_hash(*expected) != hash)
    fail(ErrorKind::SpecHashMismatch, "model was built for a different architecture, label set or front end");

  ModelSpec spec;
  try {
    spec = model_spec_from_json(Json::parse(json));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::CorruptFile, std::string("spec JSON: ") + e.what());
  }
  if (canonical_json(spec) != json) fail(ErrorKind::CorruptFile, "spec JSON is not canonical");

  BcnnModel<T> model(spec.architecture);
  auto tensors = model.state();
  const auto count = in.get<std::uint32_t>();
  if (count != tensors.size()) fail(ErrorKind::CorruptFile, "tensor count does not match architecture");
  struct Entry {
    nn::Shape shape;
    std::uint64_t offset;
  };
  std::vector<Entry> entries;
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::string name = in.get_string(4096);
    if (name != tensors[k].name) fail(ErrorKind::CorruptFile, "unexpected tensor " + name);
    if (in.get<std::uint8_t>() != 4) fail(ErrorKind::CorruptFile, "bad rank for " + name);
    nn::Shape s;
    s.n = in.get<std::uint32_t>();
    s.h = in.get<std::uint32_t>();
    s.w = in.get<std::uint32_t>();
    s.c = in.get<std::uint32_t>();
    if (in.get<std::uint8_t>() != 0) fail(ErrorKind::CorruptFile, "unsupported dtype for " + name);
    if (s != tensors[k].tensor->shape()) fail(ErrorKind::CorruptFile, "shape mismatch for " + name);
    entries.push_back({s, in.get<std::uint64_t>()});
  }
  const std::size_t payload_start = in.position();
  const auto payload = body.subspan(payload_start);
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::size_t n = entries[k].shape.size();
    if (entries[k].offset + n * sizeof(float) > payload.size())
      fail(ErrorKind::CorruptFile, "payload truncated in " + tensors[k].name);
    std::vector<float> values(n);
    std::memcpy(values.data(), payload.data() + entries[k].offset, n * sizeof(float));
    for (std::size_t i = 0; i < n; ++i) (*tensors[k].tensor)[i] = static_cast<T>(values[i]);
  }
  return LoadedModel<T>{std::move(model), std::move(spec)};
}

template <typename T = float>
LoadedModel<T> load_model(const std::filesystem::path& path, const std::optional<ModelSpec>& expected = {}) {
  return decode_model<T>(bin::read_file(path), expected);
}

}  // namespace asc
