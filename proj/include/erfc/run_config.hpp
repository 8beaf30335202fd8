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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "erfc/experiment.hpp"
#include "erfc/features.hpp"

namespace emo {

// Everything a CLI stage reads. Loaded from an optional JSON file, then
// overridden by flags, then written beside the stage outputs.
struct RunConfig {
  std::filesystem::path corpus;   // utterances.jsonl
  std::filesystem::path text;     // feature CSVs, empty when absent
  std::filesystem::path audio;
  std::filesystem::path speaker;
  std::filesystem::path pca_dir;  // audio.pca.json / speaker.pca.json
  std::filesystem::path dataset;
  std::filesystem::path model;
  std::filesystem::path out = "out";
  WindowConfig window;
  PipelineOptions pipeline;
  std::string specs = "all";
  std::string synth_preset = "default";
  nlohmann::json synth_overrides = nlohmann::json::object();
  std::string conv_id;  // predict
};

// Fills corpus and feature paths from a directory laid out like `synth` output.
void use_data_dir(RunConfig &cfg, const std::filesystem::path &dir);

nlohmann::json to_json(const RunConfig &cfg);
// Keys missing from `j` keep the values already in `base`.
RunConfig run_config_from_json(const nlohmann::json &j, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path &path);
void write_resolved_config(const std::filesystem::path &dir, const RunConfig &cfg);

std::string_view history_mode_name(HistoryMode mode);
HistoryMode parse_history_mode(std::string_view s);

}  // namespace emo
