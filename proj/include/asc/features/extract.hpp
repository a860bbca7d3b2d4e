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

#include "asc/audio/wav.hpp"
#include "asc/dsp/mel.hpp"
#include "asc/dsp/stft.hpp"
#include "asc/features/hpss.hpp"

namespace asc {

enum class Bias : std::uint8_t { TimeBiased = 0, FrequencyBiased = 1 };
enum class Component : std::uint8_t { Harmonic = 0, Percussive = 1 };

// One HPSS front end: analysis resolution plus its mel projection.
struct BiasedConfig {
  StftConfig stft;
  std::size_t n_mels = 80;
  std::size_t frames = 500;  // trailing STFT frames beyond this are cropped
  double f_min = 0.0;
  double f_max = 24000.0;

  bool operator==(const BiasedConfig&) const = default;
};

struct DspConfig {
  int sample_rate = 48000;
  double clip_seconds = 10.0;
  std::size_t duration_tolerance = 480;
  double power_exponent = 2.0;
  // ~42.7 ms window, 20 ms hop: 501 frames for 10 s, cropped to 500.
  BiasedConfig time_biased{{2048, 960, 2048, true}, 80, 500, 0.0, 24000.0};
  // 1 s window, 50% overlap, zero-padded to 2^16: 21 frames, cropped to 20.
  BiasedConfig frequency_biased{{48000, 24000, 65536, true}, 256, 20, 0.0, 24000.0};
  Kernel2d harmonic_kernel{1, 31};
  Kernel2d percussive_kernel{31, 1};
  LogMelOptions log;

  bool operator==(const DspConfig&) const = default;

  void validate() const {
    if (sample_rate <= 0) fail(ErrorKind::InvalidConfig, "sample_rate must be positive");
    if (!(clip_seconds > 0.0)) fail(ErrorKind::InvalidConfig, "clip_seconds must be positive");
    if (!(power_exponent > 0.0)) fail(ErrorKind::InvalidConfig, "power_exponent must be positive");
    for (const auto* b : {&time_biased, &frequency_biased}) {
      b->stft.validate();
      if (b->n_mels < 1 || b->frames < 1) fail(ErrorKind::InvalidConfig, "n_mels and frames must be >= 1");
      if (!(b->f_min >= 0.0 && b->f_min < b->f_max && b->f_max <= sample_rate / 2.0))
        fail(ErrorKind::InvalidConfig, "mel band limits out of range");
    }
    for (const auto& k : {harmonic_kernel, percussive_kernel}) {
      if (k.height % 2 == 0 || k.width % 2 == 0)
        fail(ErrorKind::InvalidConfig, "HPSS kernel dimensions must be odd");
    }
    if (!(log.floor > 0.0) || !(log.top_db > 0.0)) fail(ErrorKind::InvalidConfig, "bad log-mel options");
  }
};

struct FeatureMatrix {
  Grid<float> values;  // n_mels x frames, dB in [-top_db, 0]
  Bias bias = Bias::TimeBiased;
  Component component = Component::Harmonic;

  bool operator==(const FeatureMatrix&) const = default;
};

struct FeaturePair {
  FeatureMatrix harmonic;    // time-biased
  FeatureMatrix percussive;  // frequency-biased
  std::optional<std::string> label;
  std::string clip_id;

  bool operator==(const FeaturePair&) const = default;
};

// Reusable per-configuration state; safe to share across threads.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(DspConfig cfg = {})
      : cfg_(std::move(cfg)),
        time_bank_((cfg_.validate(), make_bank(cfg_.time_biased))),
        freq_bank_(make_bank(cfg_.frequency_biased)) {}

  const DspConfig& config() const { return cfg_; }
  const MelBank& time_bank() const { return time_bank_; }
  const MelBank& frequency_bank() const { return freq_bank_; }

  AudioClip prepare(AudioClip clip) const {
    return validate_clip(std::move(clip), cfg_.sample_rate, cfg_.clip_seconds, cfg_.duration_tolerance);
  }

  FeatureMatrix harmonic(const AudioClip& clip) const {
    return run(clip, cfg_.time_biased, time_bank_, Bias::TimeBiased, Component::Harmonic);
  }

  FeatureMatrix percussive(const AudioClip& clip) const {
    return run(clip, cfg_.frequency_biased, freq_bank_, Bias::FrequencyBiased, Component::Percussive);
  }

  FeaturePair extract(const AudioClip& clip, std::string clip_id,
                      std::optional<std::string> label = std::nullopt) const {
    return FeaturePair{harmonic(clip), percussive(clip), std::move(label), std::move(clip_id)};
  }

  // The separated STFT components for one front end, before mel projection.
  HpssComponents separate(const AudioClip& clip, const BiasedConfig& b) const {
    const ComplexGrid spec = stft(clip, b.stft);
    const PowerGrid mag = power(spec, cfg_.power_exponent);
    const BinaryMaskPair masks = hpss_masks(mag, cfg_.harmonic_kernel, cfg_.percussive_kernel);
    return hpss_split(spec, masks);
  }

 private:
  MelBank make_bank(const BiasedConfig& b) const {
    return mel_filterbank(b.n_mels, b.stft, cfg_.sample_rate, b.f_min, b.f_max);
  }

  FeatureMatrix run(const AudioClip& clip, const BiasedConfig& b, const MelBank& bank, Bias bias,
                    Component component) const {
    if (clip.sample_rate != cfg_.sample_rate)
      fail(ErrorKind::RateMismatch, clip.source_path + ": unexpected sample rate");
    HpssComponents parts = separate(clip, b);
    const ComplexGrid& chosen = component == Component::Harmonic ? parts.harmonic : parts.percussive;
    const RealGrid db = mel_log(power(chosen, cfg_.power_exponent), bank, cfg_.log);
    if (db.cols < b.frames)
      fail(ErrorKind::ShapeMismatch,
           clip.source_path + ": " + std::to_string(db.cols) + " frames, need " + std::to_string(b.frames));
    FeatureMatrix out;
    out.bias = bias;
    out.component = component;
    out.values = Grid<float>(db.rows, b.frames);
    for (std::size_t r = 0; r < db.rows; ++r)
      for (std::size_t t = 0; t < b.frames; ++t) out.values(r, t) = static_cast<float>(db(r, t));
    return out;
  }

  DspConfig cfg_;
  MelBank time_bank_;
  MelBank freq_bank_;
};

inline FeatureMatrix extract_harmonic_feature(const AudioClip& clip, const DspConfig& cfg = {}) {
  return FeatureExtractor(cfg).harmonic(clip);
}

inline FeatureMatrix extract_percussive_feature(const AudioClip& clip, const DspConfig& cfg = {}) {
  return FeatureExtractor(cfg).percussive(clip);
}

}  // namespace asc
