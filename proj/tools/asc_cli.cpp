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

// Command-line front end: extract, train, evaluate, predict.

#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "asc/audio/wav.hpp"
#include "asc/config.hpp"
#include "asc/features/extract.hpp"
#include "asc/features/feature_io.hpp"
#include "asc/model/serialize.hpp"
#include "asc/train/metrics.hpp"
#include "asc/train/split.hpp"
#include "asc/util/parallel.hpp"

namespace fs = std::filesystem;

namespace {

void log(const std::string& msg) { std::cerr << msg << '\n'; }

asc::PipelineConfig load_config(const std::string& path) {
  asc::PipelineConfig cfg;
  if (path.empty()) {
    cfg.validate();
    log("no --config given; using defaults:");
  } else {
    cfg = asc::load_pipeline_config(path);
    log("config " + path + ":");
  }
  log(asc::to_json(cfg).dump(2));
  return cfg;
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) { return fs::path(p.string() + suffix); }

struct ExtractArgs {
  std::string manifest, audio_dir, out_dir, config;
  unsigned jobs = 0;
};

int cmd_extract(const ExtractArgs& a) {
  const auto cfg = load_config(a.config);
  const auto manifest = asc::load_manifest(a.manifest, cfg.architecture.labels);
  const fs::path audio_dir = a.audio_dir.empty() ? fs::path(a.manifest).parent_path() : fs::path(a.audio_dir);
  fs::create_directories(a.out_dir);
  const asc::FeatureExtractor fx(cfg.dsp);

  // Clips run in parallel; each clip then runs single-threaded.
  const unsigned jobs = a.jobs == 0 ? asc::num_threads() : a.jobs;
  if (jobs > 1) asc::set_num_threads(1);

  const std::size_t n = manifest.size();
  std::vector<std::string> errors(n);
  asc::parallel_for(
      n,
      [&](std::size_t i) {
        const auto& e = manifest.entries[i];
        try {
          const auto clip = fx.prepare(asc::read_wav(audio_dir / e.path));
          asc::write_feature(fx.extract(clip, e.clip_id(), e.label), asc::feature_path(a.out_dir, e.clip_id()));
        } catch (const std::exception& ex) {
          errors[i] = ex.what();
        }
      },
      jobs);

  std::size_t failed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i].empty()) continue;
    ++failed;
    log("error: " + manifest.entries[i].path + ": " + errors[i]);
  }
  std::cout << "processed " << n - failed << ", failed " << failed << '\n';
  return failed == 0 ? 0 : 1;
}

struct TrainArgs {
  std::string manifest, features_dir, config, out;
};

int cmd_train(const TrainArgs& a) {
  const auto cfg = load_config(a.config);
  const auto& labels = cfg.architecture.labels;
  const auto manifest = asc::load_manifest(a.manifest, labels);
  const auto split = asc::split_manifest(manifest, cfg.training, labels);
  log("split: train " + std::to_string(split.train.size()) + ", validation " +
      std::to_string(split.validation.size()) + ", test " + std::to_string(split.test.size()));

  auto on_epoch = [](const asc::EpochRecord& r, const asc::PlateauProtocol::Decision& d) {
    std::ostringstream s;
    s << "epoch " << r.epoch << "  train_loss " << std::setprecision(6) << r.train_loss << "  val_loss "
      << r.val_loss << "  lr " << r.lr << "  " << std::fixed << std::setprecision(1) << r.seconds << "s";
    if (d.improved) s << "  *";
    if (d.lr_reduced) s << "  lr -> " << std::defaultfloat << d.lr;
    if (d.stop) s << "  early stop";
    log(s.str());
  };
  auto result =
      asc::train(a.features_dir, split.train, split.validation, cfg.architecture, cfg.training, on_epoch);

  const fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  asc::save_model(result.model, cfg.dsp, out);
  asc::write_history_csv(result.history, with_suffix(out, ".history.csv"));
  asc::write_manifest(split.test, with_suffix(out, ".test.tsv"));
  std::cout << "model " << out.string() << " (best epoch " << result.history.best_epoch << ", val_loss "
            << std::setprecision(6) << result.history.best_val_loss() << ")\n";
  return 0;
}

void print_metrics(const asc::Metrics& m) {
  std::cout << std::fixed << std::setprecision(4);
  std::cout << "overall accuracy " << m.overall_accuracy() << " (" << m.correct() << "/" << m.sample_count << ")\n";
  for (std::size_t k = 0; k < m.labels.size(); ++k) {
    std::cout << "  " << std::left << std::setw(20) << m.labels[k] << std::right;
    if (const auto acc = m.scene_accuracy(k)) {
      std::cout << *acc;
    } else {
      std::cout << "   n/a";
    }
    std::cout << "  (" << m.scene_count(k) << ")\n";
  }
}

struct EvaluateArgs {
  std::string model, manifest, features_dir, report;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const auto loaded = asc::load_model<float>(a.model);
  const auto manifest = asc::load_manifest(a.manifest, loaded.model.spec().labels);
  const auto metrics = asc::evaluate(loaded.model, a.features_dir, manifest);
  if (!a.report.empty()) asc::write_report(metrics, a.report);
  print_metrics(metrics);
  return 0;
}

struct PredictArgs {
  std::string model, wav;
};

int cmd_predict(const PredictArgs& a) {
  const auto loaded = asc::load_model<float>(a.model);
  const asc::FeatureExtractor fx(loaded.spec.dsp);
  const auto clip = fx.prepare(asc::read_wav(a.wav));
  const auto& spec = loaded.model.spec();
  const auto f = fx.extract(clip, asc::clip_id_for(a.wav));
  asc::LabeledSample s{f, 0};
  const std::vector<asc::LabeledSample> one{s};
  const std::array<std::size_t, 1> idx{0};
  const auto [h, p] = asc::make_batch<float>(one, idx, spec);
  const auto probs = loaded.model.predict_proba(h, p);
  const std::size_t top = asc::argmax_row(probs, 0);

  std::cout << std::fixed << std::setprecision(6);
  for (std::size_t k = 0; k < spec.labels.size(); ++k)
    std::cout << (k == top ? "* " : "  ") << std::left << std::setw(20) << spec.labels[k] << std::right << probs[k]
              << '\n';
  std::cout << "top-1: " << spec.labels[top] << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acoustic scene classification with harmonic/percussive bilinear CNNs"};
  app.require_subcommand(1);

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Compute .feat files for every clip in a manifest");
  extract->add_option("--manifest", ex.manifest, "TSV manifest (filename<TAB>scene_label)")->required();
  extract->add_option("--audio-dir", ex.audio_dir, "Root for manifest paths (default: manifest directory)");
  extract->add_option("--out-dir", ex.out_dir, "Feature output directory")->required();
  extract->add_option("--config", ex.config, "Pipeline config JSON");
  extract->add_option("--jobs", ex.jobs, "Clips processed in parallel (0 = all cores)");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Split a manifest, train, and save the best model");
  train->add_option("--manifest", tr.manifest, "TSV manifest")->required();
  train->add_option("--features-dir", tr.features_dir, "Directory written by extract")->required();
  train->add_option("--config", tr.config, "Pipeline config JSON");
  train->add_option("--out", tr.out, "Model file; history and test split are written beside it")->required();

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Accuracy report for a model on a manifest");
  evaluate->add_option("--model", ev.model, "Model file")->required();
  evaluate->add_option("--manifest", ev.manifest, "TSV manifest")->required();
  evaluate->add_option("--features-dir", ev.features_dir, "Directory written by extract")->required();
  evaluate->add_option("--report", ev.report, "JSON report output");

  PredictArgs pr;
  auto* predict = app.add_subcommand("predict", "Scene probabilities for one clip");
  predict->add_option("--model", pr.model, "Model file")->required();
  predict->add_option("--wav", pr.wav, "WAV file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) return cmd_extract(ex);
    if (*train) return cmd_train(tr);
    if (*evaluate) return cmd_evaluate(ev);
    if (*predict) return cmd_predict(pr);
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return 1;
  }
  return 1;
}
