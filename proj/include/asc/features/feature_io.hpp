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
#include <cstring>
#include <filesystem>
#include <string>

#include "asc/features/extract.hpp"
#include "asc/util/binary_io.hpp"

// `.feat` container, little-endian throughout:
//
//   magic "ASCFEAT\0" (8) | u32 version | u32 reserved      -- 16-byte header
//   u32 rows, u32 cols, u8 bias, u8 component                -- harmonic dims
//   u32 rows, u32 cols, u8 bias, u8 component                -- percussive dims
//   str clip_id | u8 has_label | str label                   -- str = u32 len + bytes
//   f32[rows*cols] harmonic | f32[rows*cols] percussive      -- row-major
//   u32 CRC-32 of all preceding bytes
namespace asc {

inline constexpr std::array<char, 8> kFeatureMagic = {'A', 'S', 'C', 'F', 'E', 'A', 'T', '\0'};
inline constexpr std::uint32_t kFeatureVersion = 1;

inline std::vector<std::uint8_t> encode_feature(const FeaturePair& pair) {
  bin::Writer w;
  w.put_bytes(std::span(reinterpret_cast<const std::uint8_t*>(kFeatureMagic.data()), 8));
  w.put<std::uint32_t>(kFeatureVersion);
  w.put<std::uint32_t>(0);
  for (const FeatureMatrix* m : {&pair.harmonic, &pair.percussive}) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m->values.rows));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m->values.cols));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(m->bias));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(m->component));
  }
  w.put_string(pair.clip_id);
  w.put<std::uint8_t>(pair.label ? 1 : 0);
  w.put_string(pair.label.value_or(""));
  w.put_floats(pair.harmonic.values.data);
  w.put_floats(pair.percussive.values.data);
  w.seal();
  return w.bytes();
}

inline FeaturePair decode_feature(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16) fail(ErrorKind::CorruptFile, "feature file shorter than header");
  if (std::memcmp(bytes.data(), kFeatureMagic.data(), 8) != 0)
    fail(ErrorKind::CorruptFile, "bad feature file magic");
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + 8, 4);
  if (version != kFeatureVersion)
    fail(ErrorKind::VersionMismatch, "feature file version " + std::to_string(version) + ", expected " +
                                         std::to_string(kFeatureVersion));
  bin::Reader in(bin::verify_sealed(bytes));
  in.get_bytes(16);

  FeaturePair pair;
  struct Dims {
    std::uint32_t rows, cols;
  };
  std::array<Dims, 2> dims{};
  for (int i = 0; i < 2; ++i) {
    FeatureMatrix& m = i == 0 ? pair.harmonic : pair.percussive;
    dims[i].rows = in.get<std::uint32_t>();
    dims[i].cols = in.get<std::uint32_t>();
    const auto bias = in.get<std::uint8_t>();
    const auto comp = in.get<std::uint8_t>();
    if (bias > 1 || comp > 1) fail(ErrorKind::CorruptFile, "bad feature tags");
    m.bias = static_cast<Bias>(bias);
    m.component = static_cast<Component>(comp);
  }
  pair.clip_id = in.get_string();
  const bool has_label = in.get<std::uint8_t>() != 0;
  std::string label = in.get_string();
  if (has_label) pair.label = std::move(label);
  for (int i = 0; i < 2; ++i) {
    FeatureMatrix& m = i == 0 ? pair.harmonic : pair.percussive;
    const std::size_t count = std::size_t{dims[i].rows} * dims[i].cols;
    if (count * 4 > in.remaining()) fail(ErrorKind::CorruptFile, "feature payload truncated");
    m.values = Grid<float>(dims[i].rows, dims[i].cols);
    in.get_floats(m.values.data);
  }
  if (in.remaining() != 0) fail(ErrorKind::CorruptFile, "trailing bytes in feature file");
  return pair;
}

inline void write_feature(const FeaturePair& pair, const std::filesystem::path& path) {
  bin::Writer w;
  w.put_bytes(encode_feature(pair));
  w.save(path);
}

inline FeaturePair read_feature(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec))
    fail(ErrorKind::MissingFeature, "no feature file " + path.string());
  return decode_feature(bin::read_file(path));
}

// Stable cache key for an audio path: extension dropped, separators -> "__".
inline std::string clip_id_for(const std::filesystem::path& audio_path) {
  std::filesystem::path p = audio_path;
  p.replace_extension();
  std::string id = p.generic_string();
  std::string out;
  for (char c : id) {
    if (c == '/') {
      out += "__";
    } else {
      out += c;
    }
  }
  return out;
}

inline std::filesystem::path feature_path(const std::filesystem::path& dir, const std::string& clip_id) {
  return dir / (clip_id + ".feat");
}

}  // namespace asc
