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

#include "erfc/run_config.hpp"

#include <fstream>

#include <fmt/format.h>

#include "erfc/error.hpp"

namespace emo {
namespace {

std::filesystem::path path_or(const nlohmann::json &j, const char *key,
                              const std::filesystem::path &fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<std::string>();
}

}  // namespace

void use_data_dir(RunConfig &cfg, const std::filesystem::path &dir) {
  cfg.corpus = dir / "utterances.jsonl";
  for (auto [field, name] : {std::pair{&cfg.text, "text.csv"}, std::pair{&cfg.audio, "audio.csv"},
                             std::pair{&cfg.speaker, "speaker.csv"}})
    *field = std::filesystem::exists(dir / name) ? dir / name : std::filesystem::path{};
}

std::string_view history_mode_name(HistoryMode mode) {
  return mode == HistoryMode::kTeacherForced ? "teacher-forced" : "autoregressive";
}

HistoryMode parse_history_mode(std::string_view s) {
  if (s == "teacher-forced") return HistoryMode::kTeacherForced;
  if (s == "autoregressive") return HistoryMode::kAutoregressive;
  throw UsageError(fmt::format("unknown mode '{}' (valid: teacher-forced, autoregressive)", s));
}

nlohmann::json to_json(const RunConfig &c) {
  nlohmann::json j;
  j["corpus"] = c.corpus.string();
  j["features"] = {{"text", c.text.string()}, {"audio", c.audio.string()},
                   {"speaker", c.speaker.string()}};
  j["pca_dir"] = c.pca_dir.string();
  j["dataset"] = c.dataset.string();
  j["model"] = c.model.string();
  j["out"] = c.out.string();
  j["window"] = to_json(c.window);
  const auto &p = c.pipeline;
  j["learner"] = p.learner;
  j["seed"] = p.seed;
  j["oof_folds"] = p.oof_folds;
  j["holdout_fraction"] = p.holdout_fraction;
  j["pca"] = {{"audio", p.pca_audio}, {"speaker", p.pca_speaker}};
  j["mode"] = history_mode_name(p.mode);
  j["session_overrides"] = p.session_overrides;
  j["specs"] = c.specs;
  j["synth"] = {{"preset", c.synth_preset}, {"overrides", c.synth_overrides}};
  j["conv_id"] = c.conv_id;
  return j;
}

RunConfig run_config_from_json(const nlohmann::json &j, RunConfig c) {
  try {
    c.corpus = path_or(j, "corpus", c.corpus);
    if (j.contains("features")) {
      const auto &f = j.at("features");
      c.text = path_or(f, "text", c.text);
      c.audio = path_or(f, "audio", c.audio);
      c.speaker = path_or(f, "speaker", c.speaker);
    }
    c.pca_dir = path_or(j, "pca_dir", c.pca_dir);
    c.dataset = path_or(j, "dataset", c.dataset);
    c.model = path_or(j, "model", c.model);
    c.out = path_or(j, "out", c.out);
    if (j.contains("window")) c.window = window_from_json(j.at("window"));
    auto &p = c.pipeline;
    p.learner = j.value("learner", p.learner);
    p.seed = j.value("seed", p.seed);
    p.oof_folds = j.value("oof_folds", p.oof_folds);
    p.holdout_fraction = j.value("holdout_fraction", p.holdout_fraction);
    if (j.contains("pca")) {
      p.pca_audio = j.at("pca").value("audio", p.pca_audio);
      p.pca_speaker = j.at("pca").value("speaker", p.pca_speaker);
    }
    if (j.contains("mode")) p.mode = parse_history_mode(j.at("mode").get<std::string>());
    p.session_overrides = j.value("session_overrides", p.session_overrides);
    c.specs = j.value("specs", c.specs);
    if (j.contains("synth")) {
      c.synth_preset = j.at("synth").value("preset", c.synth_preset);
      if (j.at("synth").contains("overrides")) c.synth_overrides = j.at("synth").at("overrides");
    }
    c.conv_id = j.value("conv_id", c.conv_id);
  } catch (const nlohmann::json::exception &e) {
    throw UsageError(fmt::format("bad config: {}", e.what()));
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  try {
    return run_config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error &e) {
    throw UsageError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_resolved_config(const std::filesystem::path &dir, const RunConfig &cfg) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "resolved-config.json", std::ios::binary);
  if (!out) throw ValidationError(ErrorKind::kIo, "cannot write " + (dir / "resolved-config.json").string());
  out << to_json(cfg).dump(2) << '\n';
}

}  // namespace emo
