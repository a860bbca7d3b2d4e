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
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "asc/util/binary_io.hpp"
#include "asc/util/error.hpp"

namespace asc {

// Mono pipeline input. Samples are finite amplitudes in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;
  std::string source_path;

  std::size_t size() const { return samples.size(); }
};

// Decoded container contents before fold-down; one vector per channel.
struct MultiChannelClip {
  std::vector<std::vector<double>> channels;
  int sample_rate = 0;
  std::string source_path;

  std::size_t frames() const { return channels.empty() ? 0 : channels[0].size(); }
};

enum class SampleFormat { Pcm16, Pcm24, Float32 };

namespace wav_detail {

inline bool tag_is(std::span<const std::uint8_t> raw, const char (&tag)[5]) {
  return std::memcmp(raw.data(), tag, 4) == 0;
}

inline double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace wav_detail

// Parses a RIFF/WAVE byte image. Channel layout is preserved; use to_mono().
inline MultiChannelClip decode_wav(std::span<const std::uint8_t> bytes,
                                   std::string source = {}) {
  using wav_detail::tag_is;
  bin::Reader in(bytes, ErrorKind::MalformedContainer);
  if (bytes.size() < 12) fail(ErrorKind::MalformedContainer, source + ": too short for RIFF header");
  if (!tag_is(in.get_bytes(4), "RIFF")) fail(ErrorKind::MalformedContainer, source + ": missing RIFF tag");
  in.get<std::uint32_t>();
  if (!tag_is(in.get_bytes(4), "WAVE")) fail(ErrorKind::MalformedContainer, source + ": missing WAVE tag");

  bool have_fmt = false;
  std::uint16_t format_tag = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;

  while (in.remaining() >= 8) {
    auto id = in.get_bytes(4);
    const auto chunk_size = in.get<std::uint32_t>();
    if (tag_is(id, "fmt ")) {
      if (chunk_size < 16 || chunk_size > in.remaining())
        fail(ErrorKind::MalformedContainer, source + ": bad fmt chunk");
      bin::Reader fmt(in.get_bytes(chunk_size), ErrorKind::MalformedContainer);
      format_tag = fmt.get<std::uint16_t>();
      channels = fmt.get<std::uint16_t>();
      rate = fmt.get<std::uint32_t>();
      fmt.get<std::uint32_t>();  // byte rate
      fmt.get<std::uint16_t>();  // block align
      bits = fmt.get<std::uint16_t>();
      if (format_tag == 0xFFFE) {
        // WAVE_FORMAT_EXTENSIBLE: the real tag leads the subformat GUID.
        if (chunk_size < 40) fail(ErrorKind::MalformedContainer, source + ": short extensible fmt");
        fmt.get<std::uint16_t>();  // cbSize
        fmt.get<std::uint16_t>();  // valid bits
        fmt.get<std::uint32_t>();  // channel mask
        format_tag = fmt.get<std::uint16_t>();
      }
      have_fmt = true;
      if (chunk_size % 2 == 1 && in.remaining() > 0) in.get<std::uint8_t>();
      continue;
    }
    if (!tag_is(id, "data")) {
      const std::size_t skip = chunk_size + (chunk_size % 2);
      if (skip > in.remaining()) break;
      in.get_bytes(skip);
      continue;
    }

    if (!have_fmt) fail(ErrorKind::MalformedContainer, source + ": data chunk before fmt");
    SampleFormat format;
    if (format_tag == 1 && bits == 16) {
      format = SampleFormat::Pcm16;
    } else if (format_tag == 1 && bits == 24) {
      format = SampleFormat::Pcm24;
    } else if (format_tag == 3 && bits == 32) {
      format = SampleFormat::Float32;
    } else {
      fail(ErrorKind::UnsupportedEncoding,
           source + ": format tag " + std::to_string(format_tag) + " with " +
               std::to_string(bits) + " bits");
    }
    if (channels == 0) fail(ErrorKind::MalformedContainer, source + ": zero channels");
    if (rate == 0) fail(ErrorKind::MalformedContainer, source + ": zero sample rate");
    if (chunk_size > in.remaining())
      fail(ErrorKind::TruncatedData,
           source + ": data chunk declares " + std::to_string(chunk_size) +
               " bytes, " + std::to_string(in.remaining()) + " present");

    const std::size_t width = bits / 8;
    const std::size_t frame_bytes = width * channels;
    const std::size_t frames = chunk_size / frame_bytes;
    auto raw = in.get_bytes(chunk_size);

    MultiChannelClip clip;
    clip.sample_rate = static_cast<int>(rate);
    clip.source_path = std::move(source);
    clip.channels.assign(channels, std::vector<double>(frames));
    for (std::size_t f = 0; f < frames; ++f) {
      const std::uint8_t* p = raw.data() + f * frame_bytes;
      for (std::size_t c = 0; c < channels; ++c, p += width) {
        double v = 0.0;
        switch (format) {
          case SampleFormat::Pcm16: {
            std::int16_t s;
            std::memcpy(&s, p, 2);
            v = s / 32768.0;
            break;
          }
          case SampleFormat::Pcm24: {
            std::int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
            if (s & 0x800000) s -= 0x1000000;
            v = s / 8388608.0;
            break;
          }
          case SampleFormat::Float32: {
            float s;
            std::memcpy(&s, p, 4);
            if (!std::isfinite(s))
              fail(ErrorKind::UnsupportedEncoding, clip.source_path + ": non-finite float sample");
            v = wav_detail::clamp_unit(s);
            break;
          }
        }
        clip.channels[c][f] = v;
      }
    }
    if (frames == 0) fail(ErrorKind::MalformedContainer, clip.source_path + ": no samples");
    return clip;
  }
  fail(ErrorKind::MalformedContainer, source + ": no data chunk");
}

inline MultiChannelClip read_wav_channels(const std::filesystem::path& path) {
  const auto bytes = bin::read_file(path);
  return decode_wav(bytes, path.string());
}

// Arithmetic mean across channels, frame by frame.
inline AudioClip to_mono(const MultiChannelClip& clip) {
  if (clip.channels.empty()) fail(ErrorKind::InvalidArgument, "clip has no channels");
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.source_path = clip.source_path;
  if (clip.channels.size() == 1) {
    out.samples = clip.channels[0];
    return out;
  }
  const std::size_t n = clip.frames();
  const double inv = 1.0 / static_cast<double>(clip.channels.size());
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (const auto& ch : clip.channels) acc += ch[i];
    out.samples[i] = acc * inv;
  }
  return out;
}

inline AudioClip read_wav(const std::filesystem::path& path) {
  return to_mono(read_wav_channels(path));
}

// Enforces rate and length. Within tolerance, long clips are truncated and
// short ones zero-padded to exactly rate * duration samples.
inline AudioClip validate_clip(AudioClip clip, int expected_rate,
                               double expected_duration,
                               std::size_t tolerance = 480) {
  if (clip.sample_rate != expected_rate)
    fail(ErrorKind::RateMismatch,
         clip.source_path + ": sample rate " + std::to_string(clip.sample_rate) +
             " Hz, expected " + std::to_string(expected_rate) + " Hz");
  const auto target = static_cast<std::size_t>(
      std::llround(expected_duration * static_cast<double>(expected_rate)));
  const std::size_t have = clip.samples.size();
  const std::size_t diff = have > target ? have - target : target - have;
  if (diff > tolerance)
    fail(ErrorKind::DurationOutOfTolerance,
         clip.source_path + ": " + std::to_string(have) + " samples, expected " +
             std::to_string(target) + " +/- " + std::to_string(tolerance));
  for (double s : clip.samples) {
    if (!std::isfinite(s))
      fail(ErrorKind::InvalidArgument, clip.source_path + ": non-finite sample");
  }
  clip.samples.resize(target, 0.0);
  return clip;
}

// Encodes channels (equal length) into a RIFF/WAVE image.
inline std::vector<std::uint8_t> encode_wav(
    const std::vector<std::vector<double>>& channels, int sample_rate,
    SampleFormat format) {
  if (channels.empty()) fail(ErrorKind::InvalidArgument, "no channels to encode");
  const std::size_t frames = channels[0].size();
  const std::uint16_t width = format == SampleFormat::Pcm16 ? 2 : format == SampleFormat::Pcm24 ? 3 : 4;
  const auto nch = static_cast<std::uint16_t>(channels.size());
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(frames * nch * width);

  bin::Writer w;
  w.put_bytes(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>("RIFF"), 4));
  w.put<std::uint32_t>(36 + data_bytes);
  w.put_bytes(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>("WAVEfmt "), 8));
  w.put<std::uint32_t>(16);
  w.put<std::uint16_t>(format == SampleFormat::Float32 ? 3 : 1);
  w.put<std::uint16_t>(nch);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(sample_rate));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(sample_rate) * nch * width);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(nch * width));
  w.put<std::uint16_t>(static_cast<std::uint16_t>(width * 8));
  w.put_bytes(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>("data"), 4));
  w.put<std::uint32_t>(data_bytes);
  for (std::size_t f = 0; f < frames; ++f) {
    for (const auto& ch : channels) {
      const double v = wav_detail::clamp_unit(ch[f]);
      switch (format) {
        case SampleFormat::Pcm16:
          w.put<std::int16_t>(static_cast<std::int16_t>(
              std::clamp<long>(std::lround(v * 32768.0), -32768, 32767)));
          break;
        case SampleFormat::Pcm24: {
          const auto s = static_cast<std::int32_t>(
              std::clamp<long>(std::lround(v * 8388608.0), -8388608, 8388607));
          w.put<std::uint8_t>(static_cast<std::uint8_t>(s & 0xFF));
          w.put<std::uint8_t>(static_cast<std::uint8_t>((s >> 8) & 0xFF));
          w.put<std::uint8_t>(static_cast<std::uint8_t>((s >> 16) & 0xFF));
          break;
        }
        case SampleFormat::Float32:
          w.put<float>(static_cast<float>(v));
          break;
      }
    }
  }
  return w.bytes();
}

inline void write_wav(const std::filesystem::path& path,
                      const std::vector<std::vector<double>>& channels,
                      int sample_rate, SampleFormat format = SampleFormat::Pcm16) {
  const auto bytes = encode_wav(channels, sample_rate, format);
  bin::Writer w;
  w.put_bytes(bytes);
  w.save(path);
}

}  // namespace asc
