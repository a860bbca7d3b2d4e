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

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/sha.h>
#include <zlib.h>

#include "asc/util/error.hpp"

// Little-endian byte buffers plus the two digests used by the on-disk
// formats (CRC-32 trailers and SHA-256 spec hashes).
namespace asc::bin {

static_assert(std::endian::native == std::endian::little,
              "on-disk formats assume a little-endian host");

inline std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for large buffers.
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const auto chunk = static_cast<uInt>(
        std::min<std::size_t>(bytes.size() - offset, 1u << 30));
    crc = ::crc32(crc, bytes.data() + offset, chunk);
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

inline std::string sha256_hex(std::string_view text) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(text.data()), text.size(),
         digest);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * SHA256_DIGEST_LENGTH);
  for (unsigned char c : digest) {
    out.push_back(kHex[c >> 4]);
    out.push_back(kHex[c & 0xF]);
  }
  return out;
}

class Writer {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }

  void put_bytes(std::span<const std::uint8_t> raw) {
    bytes_.insert(bytes_.end(), raw.begin(), raw.end());
  }

  void put_string(std::string_view s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }

  void put_floats(std::span<const float> values) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
    bytes_.insert(bytes_.end(), p, p + values.size_bytes());
  }

  // Appends CRC-32 of everything written so far.
  void seal() { put<std::uint32_t>(crc32(bytes_)); }

  std::size_t size() const { return bytes_.size(); }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes_.data()),
              static_cast<std::streamsize>(bytes_.size()));
    if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
  }

 private:
  std::vector<std::uint8_t> bytes_;
};

// Bounds-checked reader. Running off the end raises `short_kind`, which lets
// each format decide whether truncation is CorruptFile or TruncatedData.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes,
                  ErrorKind short_kind = ErrorKind::CorruptFile)
      : bytes_(bytes), short_kind_(short_kind) {}

  template <typename T>
  T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::span<const std::uint8_t> get_bytes(std::size_t n) {
    need(n);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::string get_string(std::size_t max_len = 1u << 24) {
    const auto n = get<std::uint32_t>();
    if (n > max_len) fail(short_kind_, "string length out of range");
    auto raw = get_bytes(n);
    return std::string(raw.begin(), raw.end());
  }

  void get_floats(std::span<float> out) {
    auto raw = get_bytes(out.size_bytes());
    std::memcpy(out.data(), raw.data(), raw.size());
  }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > bytes_.size() - pos_) fail(short_kind_, "unexpected end of data");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  ErrorKind short_kind_;
};

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path,
                                           ErrorKind missing_kind = ErrorKind::Io) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(missing_kind, "cannot open: " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

// Checks and strips a trailing CRC-32; returns the payload.
inline std::span<const std::uint8_t> verify_sealed(
    std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) fail(ErrorKind::CorruptFile, "file too short");
  auto body = bytes.first(bytes.size() - 4);
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + body.size(), 4);
  if (crc32(body) != stored) fail(ErrorKind::CorruptFile, "checksum mismatch");
  return body;
}

}  // namespace asc::bin
