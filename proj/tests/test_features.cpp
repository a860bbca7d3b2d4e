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

#include <gtest/gtest.h>

#include <fstream>

#include "asc/features/extract.hpp"
#include "asc/features/feature_io.hpp"
#include "asc/util/parallel.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace {

using asc::ErrorKind;

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const asc::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no asc::Error thrown";
  return ErrorKind::Io;
}

asc::ComplexGrid random_spectrum(asc::Rng& rng, std::size_t bins, std::size_t frames) {
  asc::ComplexGrid g;
  g.values = asc::Grid<asc::Complex>(bins, frames);
  for (auto& z : g.values.data) z = {rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
  return g;
}

double power_share(const asc::ComplexGrid& part, const asc::ComplexGrid& other) {
  double a = 0, b = 0;
  for (auto z : part.values.data) a += std::norm(z);
  for (auto z : other.values.data) b += std::norm(z);
  return a / (a + b);
}

TEST(Hpss, MasksComplementaryAndSplitExact) {
  asc::Rng rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const auto spec = random_spectrum(rng, 2 + rng.below(60), 2 + rng.below(60));
    const auto p = asc::power(spec);
    const auto masks = asc::hpss_masks(p, {1, 1 + 2 * rng.below(8)}, {1 + 2 * rng.below(8), 1});
    for (std::size_t i = 0; i < masks.harmonic.data.size(); ++i) {
      ASSERT_LE(masks.harmonic.data[i], 1);
      ASSERT_EQ(masks.harmonic.data[i] + masks.percussive.data[i], 1);
    }
    const auto parts = asc::hpss_split(spec, masks);
    for (std::size_t i = 0; i < spec.values.data.size(); ++i)
      ASSERT_EQ(parts.harmonic.values.data[i] + parts.percussive.values.data[i], spec.values.data[i]);
  }
}

TEST(Hpss, ConstantGridTiesToHarmonic) {
  asc::PowerGrid g;
  g.values = asc::RealGrid(40, 40, 3.0);
  const auto m = asc::hpss_masks(g);
  for (auto v : m.harmonic.data) EXPECT_EQ(v, 1);
}

TEST(Hpss, ToneRowHarmonicClickColumnPercussive) {
  asc::Rng rng(8);
  asc::PowerGrid g;
  g.values = asc::RealGrid(64, 64);
  for (auto& v : g.values.data) v = rng.uniform(0.0, 1.0);
  for (std::size_t t = 0; t < 64; ++t) g.values(20, t) = 1000.0;
  for (std::size_t k = 0; k < 64; ++k) g.values(k, 40) = 1000.0;
  const auto m = asc::hpss_masks(g);

  // Expected masks from the brute-force medians.
  const auto h = oracle::median_filter(g.values.data, 64, 64, 1, 31);
  const auto p = oracle::median_filter(g.values.data, 64, 64, 31, 1);
  std::size_t row_h = 0, col_p = 0;
  for (std::size_t t = 0; t < 64; ++t) {
    EXPECT_EQ(m.harmonic(20, t), h[20 * 64 + t] >= p[20 * 64 + t] ? 1 : 0);
    row_h += m.harmonic(20, t);
  }
  for (std::size_t k = 0; k < 64; ++k) {
    EXPECT_EQ(m.percussive(k, 40), h[k * 64 + 40] >= p[k * 64 + 40] ? 0 : 1);
    col_p += m.percussive(k, 40);
  }
  EXPECT_GT(row_h, 60u);
  EXPECT_GT(col_p, 60u);
}

TEST(Hpss, SplitShapeMismatch) {
  asc::Rng rng(2);
  const auto spec = random_spectrum(rng, 5, 5);
  asc::BinaryMaskPair m{asc::Grid<std::uint8_t>(4, 5, 1), asc::Grid<std::uint8_t>(4, 5, 0)};
  EXPECT_EQ(kind_of([&] { asc::hpss_split(spec, m); }), ErrorKind::ShapeMismatch);
}

TEST(Hpss, IdentityMask) {
  asc::Rng rng(3);
  const auto spec = random_spectrum(rng, 6, 7);
  asc::BinaryMaskPair m{asc::Grid<std::uint8_t>(6, 7, 1), asc::Grid<std::uint8_t>(6, 7, 0)};
  const auto parts = asc::hpss_split(spec, m);
  EXPECT_EQ(parts.harmonic.values, spec.values);
  for (auto z : parts.percussive.values.data) EXPECT_EQ(z, asc::Complex{});
}

class Pipeline : public ::testing::Test {
 protected:
  static const asc::FeatureExtractor& fx() {
    static const asc::FeatureExtractor instance;
    return instance;
  }
};

TEST_F(Pipeline, SilenceIsFloor) {
  asc::AudioClip silence{std::vector<double>(480000, 0.0), 48000, "silence"};
  const auto f = fx().extract(silence, "silence", std::nullopt);
  for (float v : f.harmonic.values.data) ASSERT_EQ(v, -80.0f);
  for (float v : f.percussive.values.data) ASSERT_EQ(v, -80.0f);
}

TEST_F(Pipeline, ShapesAndRangeOnRandomClips) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto clip = testutil::noise(seed);
    clip.samples.resize(480000 - 200 * seed);
    clip = asc::validate_clip(clip, 48000, 10.0);
    const auto f = fx().extract(clip, "n", std::string("park"));
    EXPECT_EQ(f.harmonic.values.rows, 80u);
    EXPECT_EQ(f.harmonic.values.cols, 500u);
    EXPECT_EQ(f.percussive.values.rows, 256u);
    EXPECT_EQ(f.percussive.values.cols, 20u);
    EXPECT_EQ(f.harmonic.bias, asc::Bias::TimeBiased);
    EXPECT_EQ(f.percussive.bias, asc::Bias::FrequencyBiased);
    EXPECT_EQ(f.percussive.component, asc::Component::Percussive);
    for (const auto* m : {&f.harmonic, &f.percussive}) {
      EXPECT_EQ(*std::max_element(m->values.data.begin(), m->values.data.end()), 0.0f);
      for (float v : m->values.data) ASSERT_GE(v, -80.0f);
    }
  }
}

TEST_F(Pipeline, ToneRoutesToHarmonic) {
  const auto parts = fx().separate(testutil::sine(440.0), fx().config().time_biased);
  EXPECT_GE(power_share(parts.harmonic, parts.percussive), 0.8);
}

TEST_F(Pipeline, ClickTrainRoutesToPercussiveWithShortWindow) {
  const auto parts = fx().separate(testutil::click_train(10.0), fx().config().time_biased);
  EXPECT_GE(power_share(parts.percussive, parts.harmonic), 0.8);
}

TEST_F(Pipeline, ToneBandCarriesMaximum) {
  const auto f = fx().harmonic(testutil::sine(440.0));
  const auto& b = fx().config().time_biased;
  // Band with the largest oracle response to the two FFT bins around 440 Hz.
  const double bin_hz = 48000.0 / static_cast<double>(b.stft.fft_len);
  std::size_t expected = 0;
  long double best = -1;
  for (std::size_t m = 0; m < b.n_mels; ++m) {
    long double resp = 0;
    for (std::size_t k = 0; k < b.stft.bins(); ++k) {
      const double d = std::abs(static_cast<double>(k) * bin_hz - 440.0) / bin_hz;
      if (d < 2.0) resp += oracle::mel_weight(m, k, b.n_mels, b.stft.fft_len, 48000, b.f_min, b.f_max) * (2.0 - d);
    }
    if (resp > best) best = resp, expected = m;
  }
  const auto& d = f.values.data;
  const auto peak = static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
  EXPECT_EQ(d[peak], 0.0f);
  EXPECT_EQ(peak / f.values.cols, expected);
}

TEST_F(Pipeline, SparseClicksMarkTheirColumns) {
  // Clicks at 2 s and 6 s sit at the centres of frames 4 and 12.
  asc::AudioClip c{std::vector<double>(480000, 0.0), 48000, "clicks"};
  c.samples[96000] = 0.9;
  c.samples[288000] = 0.9;
  const auto f = fx().percussive(c);
  std::vector<double> column_max(f.values.cols, -80.0);
  for (std::size_t m = 0; m < f.values.rows; ++m)
    for (std::size_t t = 0; t < f.values.cols; ++t)
      column_max[t] = std::max(column_max[t], static_cast<double>(f.values(m, t)));
  EXPECT_EQ(column_max[4], 0.0);
  EXPECT_EQ(column_max[12], 0.0);
  for (std::size_t t = 0; t < f.values.cols; ++t) {
    if (t == 4 || t == 12) continue;
    EXPECT_LT(column_max[t], column_max[4]) << "column " << t;
  }
}

TEST_F(Pipeline, DeterministicAcrossThreadCounts) {
  const auto clip = testutil::noise(77);
  asc::set_num_threads(1);
  const auto a = fx().extract(clip, "x", std::nullopt);
  asc::set_num_threads(4);
  const auto b = fx().extract(clip, "x", std::nullopt);
  asc::set_num_threads(0);
  EXPECT_EQ(asc::encode_feature(a), asc::encode_feature(b));
}

asc::FeaturePair small_pair() {
  asc::FeaturePair p;
  asc::Rng rng(5);
  p.harmonic.values = asc::Grid<float>(3, 4);
  p.percussive.values = asc::Grid<float>(5, 2);
  p.percussive.bias = asc::Bias::FrequencyBiased;
  p.percussive.component = asc::Component::Percussive;
  for (auto& v : p.harmonic.values.data) v = static_cast<float>(rng.uniform(-80.0, 0.0));
  for (auto& v : p.percussive.values.data) v = static_cast<float>(rng.uniform(-80.0, 0.0));
  p.label = "metro_station";
  p.clip_id = "audio__metro_station-a-1";
  return p;
}

TEST(FeatureFile, RoundTrip) {
  const auto dir = testutil::scratch_dir("feat");
  const auto p = small_pair();
  asc::write_feature(p, dir / "a.feat");
  EXPECT_EQ(asc::read_feature(dir / "a.feat"), p);
  auto unlabeled = p;
  unlabeled.label.reset();
  EXPECT_EQ(asc::decode_feature(asc::encode_feature(unlabeled)), unlabeled);
  std::filesystem::remove_all(dir);
}

TEST(FeatureFile, Errors) {
  const auto bytes = asc::encode_feature(small_pair());
  auto truncated = bytes;
  truncated.resize(bytes.size() - 5);
  EXPECT_EQ(kind_of([&] { asc::decode_feature(truncated); }), ErrorKind::CorruptFile);

  auto future = bytes;
  future[8] = 2;
  EXPECT_EQ(kind_of([&] { asc::decode_feature(future); }), ErrorKind::VersionMismatch);

  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  EXPECT_EQ(kind_of([&] { asc::decode_feature(flipped); }), ErrorKind::CorruptFile);

  EXPECT_EQ(kind_of([] { asc::read_feature("/nonexistent/x.feat"); }), ErrorKind::MissingFeature);
}

TEST(FeatureFile, ClipIdFromPath) {
  EXPECT_EQ(asc::clip_id_for("audio/airport-lisbon-1.wav"), "audio__airport-lisbon-1");
  EXPECT_EQ(asc::feature_path("out", "a__b"), std::filesystem::path("out") / "a__b.feat");
}

}  // namespace
