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

// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion names
// (AC1 ... AC10) as arguments to run a subset.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "asc/dsp/median.hpp"
#include "asc/features/feature_io.hpp"
#include "asc/model/serialize.hpp"
#include "asc/train/metrics.hpp"
#include "asc/util/parallel.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "reduced_spec.hpp"
#include "toy_corpus.hpp"

namespace {

namespace fs = std::filesystem;
using asc::nn::Shape;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a failed condition without stopping the criterion.
  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail << "FAILED: ";
    detail << what << "; ";
    pass = false;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

asc::AudioClip random_clip(asc::Rng& rng, std::size_t len) {
  asc::AudioClip c;
  c.sample_rate = 48000;
  c.samples.resize(len);
  for (auto& s : c.samples) s = rng.uniform(-1.0, 1.0);
  return c;
}

const asc::FeatureExtractor& extractor() {
  static const asc::FeatureExtractor fx;
  return fx;
}

// Features and every network stage of the default configuration.
void ac1(Outcome& o) {
  asc::Rng rng(101);
  for (int i = 0; i < 3; ++i) {
    auto clip = testutil::noise(rng.next(), 10.0, 48000, rng.uniform(0.01, 0.9));
    clip.samples.resize(480000 + rng.below(481) - 240);
    const auto f = extractor().extract(extractor().prepare(clip), "c", std::nullopt);
    o.require(f.harmonic.values.rows == 80 && f.harmonic.values.cols == 500, "harmonic feature not 80x500");
    o.require(f.percussive.values.rows == 256 && f.percussive.values.cols == 20, "percussive feature not 256x20");
  }
  asc::BcnnModel<float> model(asc::ArchitectureSpec::defaults(), 1);
  const auto h = testutil::random_tensor<float>({1, 80, 500, 1}, rng, -80, 0);
  const auto p = testutil::random_tensor<float>({1, 256, 20, 1}, rng, -80, 0);
  asc::BcnnModel<float>::Trace tr;
  const auto logits = model.forward(h, p, asc::nn::Mode::Train, &tr);
  o.require(tr.hcnn.concat_shape.c == 112, "H-CNN concat channels");
  o.require(tr.pcnn.concat_shape.c == 208, "P-CNN concat channels");
  o.require(tr.hcnn_out.shape() == Shape{1, 10, 25, 256}, "H-CNN output");
  o.require(tr.pcnn_out.shape() == Shape{1, 25, 10, 256}, "P-CNN output");
  o.require(tr.bilinear.normalized.shape().c == 256 * 256, "bilinear feature size");
  o.require(logits.shape() == Shape{1, 1, 1, 10}, "logit shape");
  o.detail << "features 80x500 / 256x20 on 3 clips; concat 112/208; streams (10,25,256)/(25,10,256); bilinear "
           << tr.bilinear.normalized.shape().c;
}

void ac2(Outcome& o) {
  asc::Rng rng(202);
  std::size_t cells = 0;
  for (int trial = 0; trial < 100; ++trial) {
    asc::ComplexGrid g;
    g.values = asc::Grid<asc::Complex>(2 + rng.below(80), 2 + rng.below(80));
    for (auto& z : g.values.data) z = {rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
    const auto masks = asc::hpss_masks(asc::power(g), {1, 1 + 2 * rng.below(10)}, {1 + 2 * rng.below(10), 1});
    const auto parts = asc::hpss_split(g, masks);
    for (std::size_t i = 0; i < g.values.data.size(); ++i) {
      o.require(masks.harmonic.data[i] + masks.percussive.data[i] == 1, "masks not complementary");
      o.require(parts.harmonic.values.data[i] + parts.percussive.values.data[i] == g.values.data[i],
                "harmonic + percussive != stft");
      if (!o.pass) return;
    }
    cells += g.values.data.size();
  }
  o.detail << "100 grids, " << cells << " cells bit-exact";
}

void ac3(Outcome& o) {
  asc::Rng rng(303);
  double median_err = 0, stft_err = 0, weight_err = 0, log_err = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t rows = 1 + rng.below(48), cols = 1 + rng.below(48);
    const std::size_t kh = 1 + 2 * rng.below(16), kw = 1 + 2 * rng.below(16);
    asc::RealGrid g(rows, cols);
    for (auto& v : g.data) v = rng.below(4) == 0 ? 0.0 : rng.uniform(0.0, 100.0);
    const auto got = asc::median_filter_2d(g, kh, kw);
    const auto ref = oracle::median_filter(g.data, rows, cols, kh, kw);
    for (std::size_t i = 0; i < ref.size(); ++i) median_err = std::max(median_err, std::abs(got.data[i] - ref[i]));
  }
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t fft = std::size_t{16} << rng.below(7);
    const std::size_t window = fft / 2 + rng.below(fft / 2 + 1);
    const std::size_t hop = 1 + rng.below(window);
    const auto clip = random_clip(rng, window + rng.below(4 * fft));
    const auto g = asc::stft(clip, {window, hop, fft, true});
    const std::size_t frame = rng.below(g.frames());
    const auto ref = oracle::stft_frame(clip.samples, frame, window, hop, fft);
    long double peak = 0, err = 0;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      peak = std::max(peak, std::abs(ref[k]));
      err = std::max(err, std::abs(oracle::cplx(g.values(k, frame).real(), g.values(k, frame).imag()) - ref[k]));
    }
    stft_err = std::max(stft_err, static_cast<double>(err / peak));
  }
  for (int trial = 0; trial < 100;) {
    const std::size_t fft = std::size_t{512} << rng.below(4);
    const std::size_t mels = 4 + rng.below(60);
    const double fmin = rng.uniform(0.0, 2000.0), fmax = rng.uniform(8000.0, 24000.0);
    const asc::StftConfig cfg{fft, fft / 2, fft, true};
    asc::MelBank bank;
    try {
      bank = asc::mel_filterbank(mels, cfg, 48000, fmin, fmax);
    } catch (const asc::Error&) {
      continue;  // too many bands for this resolution
    }
    ++trial;
    for (std::size_t m = 0; m < mels; ++m)
      for (std::size_t k = 0; k < bank.bins(); ++k) {
        const auto ref = static_cast<double>(oracle::mel_weight(m, k, mels, fft, 48000, fmin, fmax));
        weight_err = std::max(weight_err, std::abs(bank.weights(m, k) - ref) / std::max(1.0, std::abs(ref)));
      }
    asc::PowerGrid p;
    p.values = asc::RealGrid(cfg.bins(), 1 + rng.below(8));
    const double scale = std::pow(10.0, rng.uniform(-6.0, 6.0));
    for (auto& v : p.values.data) v = rng.below(5) == 0 ? 0.0 : scale * std::pow(rng.uniform(), 6.0);
    const auto got = asc::mel_log(p, bank);
    const auto ref = oracle::log_mel(p.values.data, cfg.bins(), p.frames(), mels, fft, 48000, fmin, fmax);
    for (std::size_t i = 0; i < ref.size(); ++i)
      log_err = std::max(log_err, std::abs(got.data[i] - ref[i]) / std::max(1.0, std::abs(ref[i])));
  }
  o.require(median_err <= 1e-12, "median filter error " + fmt(median_err));
  o.require(stft_err <= 1e-9, "STFT relative error " + fmt(stft_err));
  o.require(weight_err <= 1e-12, "mel weight error " + fmt(weight_err));
  o.require(log_err <= 1e-12, "log-mel error " + fmt(log_err));
  o.detail << "100 cases each; max error median " << fmt(median_err) << ", STFT rel " << fmt(stft_err)
           << ", mel weights " << fmt(weight_err) << ", log-mel " << fmt(log_err);
}

double share(const asc::ComplexGrid& part, const asc::ComplexGrid& other) {
  double a = 0, b = 0;
  for (auto z : part.values.data) a += std::norm(z);
  for (auto z : other.values.data) b += std::norm(z);
  return a / (a + b);
}

// Measured on the short-window (time-biased) separation; see README.
void ac4(Outcome& o) {
  const auto& cfg = extractor().config().time_biased;
  const auto tone = extractor().separate(testutil::sine(440.0), cfg);
  const auto clicks = extractor().separate(testutil::click_train(10.0), cfg);
  const double h = share(tone.harmonic, tone.percussive);
  const double p = share(clicks.percussive, clicks.harmonic);
  o.require(h >= 0.8, "tone harmonic share " + fmt(h));
  o.require(p >= 0.8, "click percussive share " + fmt(p));
  o.detail << "440 Hz tone -> harmonic " << fmt(h) << "; 10 Hz clicks -> percussive " << fmt(p);
}

void ac5(Outcome& o) {
  asc::Rng rng(505);
  std::vector<std::pair<std::string, testutil::GradReport>> reports = {
      {"conv", gradcheck::conv(rng)},
      {"batchnorm/train", gradcheck::batchnorm(rng, asc::nn::Mode::Train)},
      {"batchnorm/infer", gradcheck::batchnorm(rng, asc::nn::Mode::Infer)},
      {"relu", gradcheck::relu(rng)},
      {"maxpool", gradcheck::maxpool(rng)},
      {"concat", gradcheck::concat(rng)},
      {"linear", gradcheck::linear(rng)},
      {"softmax-ce", gradcheck::softmax_ce(rng)},
      {"bilinear", gradcheck::bilinear(rng)}};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) reports.push_back({"model", gradcheck::model(seed)});
  double worst = 0;
  for (const auto& [name, r] : reports) {
    o.require(r.max_rel < 1e-4, name + " rel error " + fmt(r.max_rel));
    worst = std::max(worst, r.max_rel);
  }
  o.detail << "8 layer types + 5 two-stream models; worst relative error " << fmt(worst);
}

void ac6(Outcome& o) {
  asc::Rng rng(606);
  double err = 0, swap_err = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t ch = 1 + rng.below(32), cp = 1 + rng.below(32);
    const auto h = testutil::random_tensor<double>({1, 10, 25, ch}, rng);
    const auto p = testutil::random_tensor<double>({1, 25, 10, cp}, rng);
    const auto got = asc::bilinear_matrix(h, p);
    const auto ref = oracle::bilinear_sum({h.values().begin(), h.values().end()},
                                          {p.values().begin(), p.values().end()}, 250, ch, cp);
    const auto swapped = asc::bilinear_matrix(p, h);
    for (std::size_t i = 0; i < ch; ++i)
      for (std::size_t j = 0; j < cp; ++j) {
        err = std::max(err, std::abs(got[i * cp + j] - static_cast<double>(ref[i * cp + j])));
        swap_err = std::max(swap_err, std::abs(got[i * cp + j] - swapped[j * ch + i]));
      }
  }
  o.require(err <= 1e-10, "outer-product sum error " + fmt(err));
  o.require(swap_err <= 1e-10, "swap-transpose error " + fmt(swap_err));
  o.detail << "250-position sum max error " << fmt(err) << ", swap-transpose " << fmt(swap_err);
}

void ac7(Outcome& o) {
  const auto train_set = toy::samples(toy::clips(4));
  const auto val_set = toy::samples(toy::clips(1, 4));
  asc::TrainConfig cfg;  // batch 16, Adam 1e-3, plateau 5, patience 15
  cfg.max_epochs = 50;
  cfg.seed = 7;
  const auto r = asc::train(train_set, val_set, testutil::toy_spec(toy::labels()), cfg);
  const double acc = asc::evaluate(r.model, train_set).overall_accuracy();
  o.require(acc == 1.0, "training accuracy " + fmt(acc));
  o.detail << "8 clips, " << r.history.epochs.size() << " epochs, best epoch " << r.history.best_epoch
           << ", training accuracy " << acc << ", final train loss " << fmt(r.history.epochs.back().train_loss);
}

void ac8(Outcome& o) {
  asc::TrainConfig cfg;
  asc::PlateauProtocol p(cfg);
  p.observe(1.0);
  std::size_t stopped_at = 0;
  std::vector<double> lrs;
  for (std::size_t i = 1; i <= 40 && stopped_at == 0; ++i) {
    const auto d = p.observe(1.0);
    lrs.push_back(d.lr);
    if (d.stop) stopped_at = i;
  }
  o.require(stopped_at == 15, "stopped after " + std::to_string(stopped_at) + " non-improving epochs");
  o.require(lrs[3] == 1e-3 && lrs[4] == 5e-4, "first halving not after 5 epochs");
  o.require(lrs[8] == 5e-4 && lrs[9] == 2.5e-4, "second halving not after 10 epochs");

  // An improvement resets both counters.
  asc::PlateauProtocol q(cfg);
  std::vector<double> seq = {1.0, 1.0, 1.0, 1.0, 0.5};
  for (int i = 0; i < 15; ++i) seq.push_back(0.6);
  std::size_t q_stop = 0;
  for (std::size_t i = 0; i < seq.size(); ++i)
    if (q.observe(seq[i]).stop && q_stop == 0) q_stop = i;
  o.require(q_stop == 19, "counter reset on improvement");
  o.detail << "stop after exactly 15 flat epochs; lr 1e-3 -> 5e-4 after 5 -> 2.5e-4 after 10";
}

void ac9(Outcome& o, const fs::path& dir) {
  const auto clip = testutil::noise(909);
  asc::set_num_threads(1);
  const auto a = asc::encode_feature(extractor().extract(clip, "x", std::string("park")));
  asc::set_num_threads(0);
  const auto b = asc::encode_feature(extractor().extract(clip, "x", std::string("park")));
  o.require(a == b, "feature files differ");

  const auto train_set = toy::samples(toy::clips(2));
  const auto val_set = toy::samples(toy::clips(1, 2));
  asc::TrainConfig cfg;
  cfg.max_epochs = 3;
  cfg.batch_size = 2;
  std::vector<std::vector<std::uint8_t>> models, reports;
  for (int run = 0; run < 2; ++run) {
    auto r = asc::train(train_set, val_set, testutil::toy_spec(toy::labels()), cfg);
    const auto model_path = dir / ("m" + std::to_string(run) + ".bcnn");
    const auto report_path = dir / ("r" + std::to_string(run) + ".json");
    asc::save_model(r.model, asc::DspConfig{}, model_path);
    asc::write_report(asc::evaluate(asc::load_model<float>(model_path).model, val_set), report_path);
    models.push_back(asc::bin::read_file(model_path));
    reports.push_back(asc::bin::read_file(report_path));
  }
  o.require(models[0] == models[1], "model files differ");
  o.require(reports[0] == reports[1], "reports differ");
  o.detail << "features (1 vs all threads), model files (" << models[0].size() << " bytes) and reports identical";
}

int system_quiet(const std::string& cmd, const fs::path& log) {
  const int status = std::system((cmd + " >>" + log.string() + " 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// extract -> train -> evaluate through the command-line tool with the
// default network and front end, on a few synthetic clips and one epoch.
void ac10(Outcome& o, const fs::path& dir) {
  fs::create_directories(dir / "audio");
  asc::DatasetManifest m;
  for (int i = 0; i < 4; ++i) {
    const std::string a = "audio/park-" + std::to_string(i) + ".wav";
    const std::string b = "audio/metro-" + std::to_string(i) + ".wav";
    asc::write_wav(dir / a, {testutil::noise(1000 + i).samples}, 48000);
    auto hum = testutil::sine(100.0 + 20.0 * i, 10.0, 48000, 0.3);
    const auto n = testutil::noise(2000 + i, 10.0, 48000, 0.05);
    for (std::size_t k = 0; k < hum.samples.size(); ++k) hum.samples[k] += n.samples[k];
    asc::write_wav(dir / b, {hum.samples}, 48000);
    m.entries.push_back({a, "park", {}});
    m.entries.push_back({b, "metro", {}});
  }
  asc::write_manifest(m, dir / "manifest.tsv");
  std::ofstream(dir / "config.json")
      << R"({"training": {"max_epochs": 1, "batch_size": 2, "test_fraction": 0.25, "validation_fraction": 0.5}})";

  const std::string cli = ASC_CLI_PATH;
  const auto d = [&](const std::string& s) { return (dir / s).string(); };
  const auto log = dir / "cli.log";
  const int extract = system_quiet(cli + " extract --manifest " + d("manifest.tsv") + " --out-dir " + d("feat") +
                                       " --config " + d("config.json"),
                                   log);
  o.require(extract == 0, "extract exit " + std::to_string(extract));
  const int train = system_quiet(cli + " train --manifest " + d("manifest.tsv") + " --features-dir " + d("feat") +
                                     " --config " + d("config.json") + " --out " + d("model.bcnn"),
                                 log);
  o.require(train == 0, "train exit " + std::to_string(train));
  const int evaluate =
      system_quiet(cli + " evaluate --model " + d("model.bcnn") + " --manifest " + d("model.bcnn.test.tsv") +
                       " --features-dir " + d("feat") + " --report " + d("report.json"),
                   log);
  o.require(evaluate == 0, "evaluate exit " + std::to_string(evaluate));
  if (!o.pass) return;

  std::ifstream in(dir / "report.json");
  const auto report = asc::Json::parse(in);
  const auto& scenes = asc::default_scenes();
  o.require(report["per_scene"].size() == scenes.size(), "per-scene rows");
  for (std::size_t k = 0; k < scenes.size() && o.pass; ++k)
    o.require(report["per_scene"][k]["scene"] == scenes[k], "scene order");
  o.require(report["confusion_matrix"].size() == 10 && report["confusion_matrix"][0].size() == 10, "10x10 matrix");
  o.detail << "default network, 8 synthetic clips, 1 epoch; report with 10 scenes and 10x10 matrix (accuracy "
           << report["overall_accuracy"].get<double>() << " on " << report["sample_count"] << " held-out clips, unscored)";
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path dir = testutil::scratch_dir("acceptance");
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"AC1", ac1},
      {"AC2", ac2},
      {"AC3", ac3},
      {"AC4", ac4},
      {"AC5", ac5},
      {"AC6", ac6},
      {"AC7", ac7},
      {"AC8", ac8},
      {"AC9", [&](Outcome& o) { ac9(o, dir / "ac9"); }},
      {"AC10", [&](Outcome& o) { ac10(o, dir / "ac10"); }},
  };
  std::set<std::string> only(argv + 1, argv + argc);
  fs::create_directories(dir / "ac9");

  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && !only.count(name)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += o.pass ? 0 : 1;
    std::printf("%s %s (%.1fs) %s\n", name.c_str(), o.pass ? "PASS" : "FAIL", secs, o.detail.str().c_str());
    std::fflush(stdout);
  }
  fs::remove_all(dir);
  return failures == 0 ? 0 : 1;
}
