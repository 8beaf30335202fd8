// Copyright (c) 2026 The ERFC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>
#include <tbb/global_control.h>
#include <tbb/info.h>
#include <tbb/task_arena.h>

#include "erfc/dataset_io.hpp"
#include "erfc/error.hpp"
#include "erfc/experiment.hpp"
#include "erfc/run_config.hpp"
#include "erfc/seeding.hpp"
#include "erfc/synth.hpp"

namespace {

using namespace emo;
namespace fs = std::filesystem;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> data, corpus, text, audio, speaker, pca_dir, dataset, model;
  std::optional<int> w, w_text, w_audio, w_speaker, w_emotion, k;
  std::optional<bool> avd;
  std::optional<std::string> scheme, learner, mode, specs, preset, conv_id;
  std::optional<int> oof_folds, pca_audio, pca_speaker, conversations;
  std::optional<double> holdout;
};

void add_data_flags(CLI::App *cmd, Flags &f, bool with_pca = true) {
  cmd->add_option("--data", f.data, "Directory with utterances.jsonl and feature CSVs");
  cmd->add_option("--corpus", f.corpus, "Utterance JSONL file");
  cmd->add_option("--text", f.text, "Text feature CSV");
  cmd->add_option("--audio", f.audio, "Audio feature CSV");
  cmd->add_option("--speaker", f.speaker, "Speaker feature CSV");
  if (with_pca) cmd->add_option("--pca-dir", f.pca_dir, "Directory with fitted PCA models");
}

void add_window_flags(CLI::App *cmd, Flags &f) {
  cmd->add_option("--w", f.w, "Context window for every modality and the emotion history");
  cmd->add_option("--w-text", f.w_text, "Text window (overrides --w)");
  cmd->add_option("--w-audio", f.w_audio, "Audio window (overrides --w)");
  cmd->add_option("--w-speaker", f.w_speaker, "Speaker window (overrides --w)");
  cmd->add_option("--w-emotion", f.w_emotion, "Emotion history window (overrides --w)");
  cmd->add_option("--k", f.k, "Forecast horizon");
  cmd->add_flag("--avd,!--no-avd", f.avd, "Use emotion attributes in the history");
  cmd->add_option("--scheme", f.scheme, "six or four");
}

void add_pipeline_flags(CLI::App *cmd, Flags &f) {
  cmd->add_option("--learner", f.learner, "rf:N:D, logreg:L2 or stump-boost:R");
  cmd->add_option("--oof-folds", f.oof_folds, "Conversation folds for out-of-fold stacking");
  cmd->add_option("--holdout", f.holdout, "Validation fraction of the training sessions");
  cmd->add_option("--pca-audio", f.pca_audio, "Audio PCA width");
  cmd->add_option("--pca-speaker", f.pca_speaker, "Speaker PCA width");
  cmd->add_option("--mode", f.mode, "teacher-forced or autoregressive");
}

RunConfig resolve(const Flags &f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  if (f.data) use_data_dir(c, *f.data);
  if (f.corpus) c.corpus = *f.corpus;
  if (f.text) c.text = *f.text;
  if (f.audio) c.audio = *f.audio;
  if (f.speaker) c.speaker = *f.speaker;
  if (f.pca_dir) c.pca_dir = *f.pca_dir;
  if (f.dataset) c.dataset = *f.dataset;
  if (f.model) c.model = *f.model;
  if (f.out) c.out = *f.out;
  auto &w = c.window;
  if (f.w) w.w_text = w.w_audio = w.w_speaker = w.w_emotion = *f.w;
  if (f.w_text) w.w_text = *f.w_text;
  if (f.w_audio) w.w_audio = *f.w_audio;
  if (f.w_speaker) w.w_speaker = *f.w_speaker;
  if (f.w_emotion) w.w_emotion = *f.w_emotion;
  if (f.k) w.k = *f.k;
  if (f.avd) w.use_avd = *f.avd;
  if (f.scheme) {
    auto s = parse_scheme(*f.scheme);
    if (!s) throw UsageError(fmt::format("--scheme: unknown scheme '{}' (valid: six, four)", *f.scheme));
    w.scheme = *s;
  }
  auto &p = c.pipeline;
  if (f.seed) p.seed = *f.seed;
  if (f.learner) p.learner = *f.learner;
  if (f.oof_folds) p.oof_folds = *f.oof_folds;
  if (f.holdout) p.holdout_fraction = *f.holdout;
  if (f.pca_audio) p.pca_audio = *f.pca_audio;
  if (f.pca_speaker) p.pca_speaker = *f.pca_speaker;
  if (f.mode) p.mode = parse_history_mode(*f.mode);
  if (f.specs) c.specs = *f.specs;
  if (f.preset) c.synth_preset = *f.preset;
  if (f.conv_id) c.conv_id = *f.conv_id;
  if (f.conversations) c.synth_overrides["n_conversations"] = *f.conversations;
  return c;
}

void require(const fs::path &p, const char *flag) {
  if (p.empty()) throw UsageError(fmt::format("{} is required", flag));
}

CorpusData load_data(const RunConfig &c) {
  require(c.corpus, "--corpus (or --data)");
  return load_corpus(c.corpus, c.text, c.audio, c.speaker);
}

FeatureSet features_with_pca(const CorpusData &data, const fs::path &pca_dir,
                             std::optional<PcaModel> &audio, std::optional<PcaModel> &speaker) {
  if (!pca_dir.empty()) {
    if (data.audio.dim() > 0 && fs::exists(pca_dir / "audio.pca.json"))
      audio = load_pca(pca_dir / "audio.pca.json");
    if (data.speaker.dim() > 0 && fs::exists(pca_dir / "speaker.pca.json"))
      speaker = load_pca(pca_dir / "speaker.pca.json");
  }
  return reduce_features(data.text, data.audio, data.speaker, audio ? &*audio : nullptr,
                         speaker ? &*speaker : nullptr);
}

void write_json(const fs::path &path, const nlohmann::json &j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError(ErrorKind::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json split_json(const SessionSplit &s) {
  return {{"test_session", s.test_session}, {"train", s.train}, {"validation", s.validation},
          {"test", s.test}};
}

std::vector<TurnedConversation> subset(const CorpusData &data, const std::vector<std::string> &ids) {
  std::vector<TurnedConversation> out;
  for (const auto &id : ids) out.push_back(data.find(id));
  return out;
}

int cmd_synth(const RunConfig &c) {
  nlohmann::json j = c.synth_overrides;
  j["preset"] = c.synth_preset;
  j["seed"] = c.pipeline.seed;
  const SynthConfig cfg = synth_config_from_json(j);
  const auto corpus = generate(cfg);
  write_synth(c.out, corpus);
  write_resolved_config(c.out, c);
  spdlog::info("wrote {} conversations ({} utterances) to {}", corpus.conversations.size(),
               record_count(corpus.conversations), c.out.string());
  return 0;
}

int cmd_fit_pca(const RunConfig &c) {
  const auto data = load_data(c);
  const auto split = split_sessions(data.conv_ids(), derive_seed(c.pipeline.seed, {fnv1a64("holdout")}),
                                    c.pipeline.holdout_fraction, c.pipeline.session_overrides);
  fs::create_directories(c.out);
  const auto ids = split.non_test();
  if (auto m = fit_modality_pca(data.audio, ids, c.pipeline.pca_audio, c.pipeline.seed))
    save_pca(c.out / "audio.pca.json", *m);
  if (auto m = fit_modality_pca(data.speaker, ids, c.pipeline.pca_speaker, c.pipeline.seed))
    save_pca(c.out / "speaker.pca.json", *m);
  write_json(c.out / "split.json", split_json(split));
  write_resolved_config(c.out, c);
  return 0;
}

int cmd_build(const RunConfig &c) {
  c.window.validate();
  const auto data = load_data(c);
  const auto split = split_sessions(data.conv_ids(), derive_seed(c.pipeline.seed, {fnv1a64("holdout")}),
                                    c.pipeline.holdout_fraction, c.pipeline.session_overrides);
  std::optional<PcaModel> audio, speaker;
  FeatureSet features;
  if (c.pca_dir.empty()) {
    const auto ids = split.non_test();
    audio = fit_modality_pca(data.audio, ids, c.pipeline.pca_audio, c.pipeline.seed);
    speaker = fit_modality_pca(data.speaker, ids, c.pipeline.pca_speaker, c.pipeline.seed);
    fs::create_directories(c.out / "pca");
    if (audio) save_pca(c.out / "pca" / "audio.pca.json", *audio);
    if (speaker) save_pca(c.out / "pca" / "speaker.pca.json", *speaker);
    features = reduce_features(data.text, data.audio, data.speaker, audio ? &*audio : nullptr,
                               speaker ? &*speaker : nullptr);
  } else {
    features = features_with_pca(data, c.pca_dir, audio, speaker);
  }
  for (const auto &[name, ids] : {std::pair{"train", split.train}, std::pair{"validation", split.validation},
                                  std::pair{"test", split.test}}) {
    Dataset ds{c.window, features.dims(), build_examples(subset(data, ids), features, c.window)};
    write_dataset(c.out / name, ds);
    spdlog::info("{}: {} examples of dimension {}", name, ds.examples.size(),
                 example_dim(c.window, ds.dims));
  }
  write_json(c.out / "split.json", split_json(split));
  write_resolved_config(c.out, c);
  return 0;
}

fs::path dataset_part(const fs::path &dir, const char *part) {
  return fs::exists(dir / part / "meta.json") ? dir / part : dir;
}

int cmd_train(const RunConfig &c) {
  require(c.dataset, "--dataset");
  const Dataset ds = read_dataset(dataset_part(c.dataset, "train"));
  StackedForecaster::Options opts;
  opts.learner = c.pipeline.learner;
  opts.seed = derive_seed(c.pipeline.seed, {fnv1a64("model")});
  opts.oof_folds = c.pipeline.oof_folds;
  const auto model = StackedForecaster::train(ds.examples, ds.cfg, opts);
  fs::create_directories(c.out);
  model.save(c.out / "model.json");
  write_resolved_config(c.out, c);
  spdlog::info("trained on {} examples from {} conversations", ds.examples.size(),
               model.train_conv_ids().size());
  return 0;
}

Evaluation evaluate_examples(const StackedForecaster &model, const std::vector<Example> &examples) {
  Evaluation ev;
  ev.predictions = model.predict_batch(examples);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    ev.predictions[i].apply_mask(examples[i].targets);
    ev.truth.push_back(examples[i].targets);
  }
  return ev;
}

void assert_unseen(const StackedForecaster &model, const std::vector<std::string> &ids) {
  for (const auto &id : ids)
    if (model.train_conv_ids().count(id))
      throw ValidationError(ErrorKind::kBadModel,
                            fmt::format("model was trained on evaluation conversation {}", id));
}

int cmd_evaluate(const RunConfig &c) {
  require(c.model, "--model");
  const auto model = StackedForecaster::load(c.model);
  const WindowConfig &w = model.config();
  Evaluation test, val;
  if (!c.dataset.empty()) {
    if (c.pipeline.mode != HistoryMode::kTeacherForced)
      throw UsageError("--mode autoregressive needs the corpus (--data), not --dataset");
    const Dataset t = read_dataset(dataset_part(c.dataset, "test"));
    std::vector<std::string> ids;
    for (const auto &e : t.examples) ids.push_back(e.conv_id);
    assert_unseen(model, ids);
    test = evaluate_examples(model, t.examples);
    if (fs::exists(c.dataset / "validation" / "meta.json"))
      val = evaluate_examples(model, read_dataset(c.dataset / "validation").examples);
  } else {
    const auto data = load_data(c);
    std::optional<PcaModel> audio, speaker;
    const FeatureSet features = features_with_pca(data, c.pca_dir, audio, speaker);
    const ExampleBuilder builder(w, features);
    const auto split = split_sessions(data.conv_ids(), 0, 0.0, c.pipeline.session_overrides);
    assert_unseen(model, split.test);
    std::vector<std::string> held;
    for (const auto &id : split.train)
      if (!model.train_conv_ids().count(id)) held.push_back(id);
    test = evaluate_conversations(model, builder, data, split.test, c.pipeline.mode);
    if (!held.empty()) val = evaluate_conversations(model, builder, data, held, c.pipeline.mode);
  }
  EvalReport report = compute_metrics(test.predictions, test.truth, w.k, w.scheme);
  if (!val.truth.empty()) {
    try {
      report.acc_validation = compute_metrics(val.predictions, val.truth, w.k, w.scheme).acc_overall;
    } catch (const ValidationError &e) {
      spdlog::warn("no validation accuracy: {}", e.what());
    }
  }
  fs::create_directories(c.out);
  write_json(c.out / "report.json", report_to_json(report));
  std::ofstream conf(c.out / "confusion.csv", std::ios::binary);
  write_confusion_csv(conf, report.confusion, w.scheme);
  write_resolved_config(c.out, c);
  fmt::print("current {:.1f}  future {:.1f}  overall {:.1f}  ({} predictions)\n",
             display_round(report.acc_current), display_round(report.acc_future_avg),
             display_round(report.acc_overall), report.n_predictions);
  return 0;
}

int cmd_grid(const RunConfig &c) {
  const auto specs = parse_spec_list(c.specs);
  const auto data = load_data(c);
  const auto grid = run_grid(data, specs, c.pipeline);
  write_grid(c.out, grid);
  write_resolved_config(c.out, c);
  fmt::print("{}", tables_markdown(grid));
  return 0;
}

int cmd_predict(const RunConfig &c) {
  require(c.model, "--model");
  if (c.conv_id.empty()) throw UsageError("--conv is required");
  const auto model = StackedForecaster::load(c.model);
  const auto data = load_data(c);
  std::optional<PcaModel> audio, speaker;
  const FeatureSet features = features_with_pca(data, c.pca_dir, audio, speaker);
  const ExampleBuilder builder(model.config(), features);
  const auto &conv = data.find(c.conv_id);
  const auto preds = predict_conversation(model, builder, conv, c.pipeline.mode);
  const int k = model.config().k;
  const auto names = class_names(model.config().scheme);
  fs::create_directories(c.out);
  std::ofstream out(c.out / "predictions.csv", std::ios::binary);
  if (!out) throw ValidationError(ErrorKind::kIo, "cannot write predictions.csv");
  out << "conv_id,turn,slot,horizon,target_turn,predicted";
  for (const auto &n : names) out << ",p_" << n;
  out << '\n';
  std::size_t rows = 0;
  for (std::size_t t = 0; t < preds.size(); ++t)
    for (int slot = 0; slot < 2; ++slot)
      for (int h = 0; h <= k; ++h) {
        const auto &tp = preds[t].targets[static_cast<std::size_t>(target_index(slot, h, k))];
        if (!tp) continue;
        out << conv.conv_id << ',' << t << ',' << slot << ',' << h << ',' << t + static_cast<std::size_t>(h)
            << ',' << names[static_cast<std::size_t>(tp->label)];
        for (double p : tp->probs) out << ',' << fmt::format("{:.6f}", p);
        out << '\n';
        ++rows;
      }
  write_resolved_config(c.out, c);
  spdlog::info("{} predictions for {} turns", rows, preds.size());
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Emotion recognition and forecasting in dyadic conversations"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  int jobs = 0;
  bool quiet = false;
  app.add_option("--config", f.config, "JSON run configuration (flags override it)");
  app.add_option("--seed", f.seed, "Root seed");
  app.add_option("--jobs", jobs, "Worker threads (default: all cores)");
  app.add_option("--out", f.out, "Output directory");
  app.add_flag("--quiet", quiet, "Only log warnings and errors");

  auto *synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--preset", f.preset, "default, separable, influence, avd or merge");
  synth->add_option("--conversations", f.conversations, "Number of conversations");
  auto *fit = app.add_subcommand("fit-pca", "Fit audio/speaker PCA on the training sessions");
  add_data_flags(fit, f, false);
  add_pipeline_flags(fit, f);
  auto *build = app.add_subcommand("build", "Build train/validation/test datasets");
  add_data_flags(build, f);
  add_window_flags(build, f);
  add_pipeline_flags(build, f);
  auto *train = app.add_subcommand("train", "Train the stacked forecaster");
  train->add_option("--dataset", f.dataset, "Dataset directory from build");
  add_pipeline_flags(train, f);
  auto *evaluate = app.add_subcommand("evaluate", "Score a model on the test session");
  evaluate->add_option("--model", f.model, "model.json from train")->required();
  evaluate->add_option("--dataset", f.dataset, "Dataset directory from build");
  add_data_flags(evaluate, f);
  add_pipeline_flags(evaluate, f);
  auto *grid = app.add_subcommand("grid", "Run the E1..E6 experiment grid end to end");
  grid->add_option("--specs", f.specs, "Comma-separated experiment ids or 'all'");
  add_data_flags(grid, f, false);
  add_pipeline_flags(grid, f);
  auto *predict = app.add_subcommand("predict", "Per-turn predictions for one conversation");
  predict->add_option("--model", f.model, "model.json from train")->required();
  predict->add_option("--conv", f.conv_id, "Conversation id")->required();
  add_data_flags(predict, f);
  add_pipeline_flags(predict, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  auto logger = spdlog::stderr_color_mt("erfc");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    if (jobs < 0) throw UsageError("--jobs must be >= 0");
    const int threads = jobs > 0 ? jobs : tbb::info::default_concurrency();
    tbb::global_control limit(tbb::global_control::max_allowed_parallelism,
                              static_cast<std::size_t>(threads));
    tbb::task_arena arena(threads);
    const RunConfig c = resolve(f);
    return arena.execute([&] {
      if (*synth) return cmd_synth(c);
      if (*fit) return cmd_fit_pca(c);
      if (*build) return cmd_build(c);
      if (*train) return cmd_train(c);
      if (*evaluate) return cmd_evaluate(c);
      if (*grid) return cmd_grid(c);
      return cmd_predict(c);
    });
  } catch (const UsageError &e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const ValidationError &e) {
    spdlog::error("{} [{}]", e.what(), error_kind_name(e.kind()));
    return 1;
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}
