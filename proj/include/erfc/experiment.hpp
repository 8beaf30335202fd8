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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "erfc/corpus.hpp"
#include "erfc/features.hpp"
#include "erfc/metrics.hpp"
#include "erfc/pca.hpp"
#include "erfc/stacking.hpp"
#include "erfc/turns.hpp"

namespace emo {

struct ExperimentSpec {
  std::string id;
  Scheme scheme = Scheme::kSix;
  bool use_avd = true;
  int w = 3;
  int k = 3;
  WindowConfig window() const { return WindowConfig::uniform(w, k, use_avd, scheme); }
};

// E1..E6.
const std::vector<ExperimentSpec> &experiment_grid();
ExperimentSpec experiment_spec(const std::string &id);
// Comma-separated ids; "all" selects the whole grid.
std::vector<ExperimentSpec> parse_spec_list(const std::string &list);

struct SessionSplit {
  std::vector<std::string> train;       // fitting set, holdout removed
  std::vector<std::string> validation;  // holdout drawn from the training sessions
  std::vector<std::string> test;        // last session
  int test_session = 0;
  std::vector<std::string> non_test() const;
};

// Last session is the test set, all others train. The validation holdout is
// round(fraction * n) training conversations (at least one when n >= 2) with
// the smallest seeded conv_id hashes.
SessionSplit split_sessions(const std::vector<std::string> &conv_ids, std::uint64_t seed,
                            double holdout_fraction = 0.1,
                            const std::map<std::string, int> &overrides = {});

struct CorpusData {
  std::vector<TurnedConversation> conversations;
  FeatureStore text;
  FeatureStore audio;
  FeatureStore speaker;
  std::vector<std::string> conv_ids() const;
  const TurnedConversation &find(const std::string &conv_id) const;
};

// Feature paths may be empty; a missing modality becomes a store of dim 0.
CorpusData load_corpus(const std::filesystem::path &utterances,
                       const std::filesystem::path &text,
                       const std::filesystem::path &audio,
                       const std::filesystem::path &speaker);

struct SynthCorpus;
CorpusData corpus_from_synth(const SynthCorpus &synth);

struct PipelineOptions {
  std::string learner = "rf:100:12";
  std::uint64_t seed = 0;
  int oof_folds = 5;
  double holdout_fraction = 0.1;
  // Requested PCA widths; capped at what the training rows support. 0 keeps
  // the raw vectors.
  int pca_audio = 250;
  int pca_speaker = 256;
  HistoryMode mode = HistoryMode::kTeacherForced;
  std::map<std::string, int> session_overrides;
};

struct PreparedData {
  SessionSplit split;
  FeatureSet features;
  std::optional<PcaModel> audio_pca;
  std::optional<PcaModel> speaker_pca;
};

// Splits sessions and fits PCA on the non-test conversations.
PreparedData prepare(const CorpusData &data, const PipelineOptions &opts);
std::optional<PcaModel> fit_modality_pca(const FeatureStore &store,
                                         const std::vector<std::string> &conv_ids,
                                         int requested, std::uint64_t seed);

struct Evaluation {
  std::vector<Prediction> predictions;
  std::vector<TargetTruth> truth;
};

Evaluation evaluate_conversations(const StackedForecaster &model, const ExampleBuilder &builder,
                                  const CorpusData &data, const std::vector<std::string> &conv_ids,
                                  HistoryMode mode);

struct SpecResult {
  std::string id;
  WindowConfig window;
  EvalReport report;
  std::size_t x_dim = 0;
  std::size_t level2_dim = 0;
  std::size_t n_train_examples = 0;
  std::size_t n_validation_examples = 0;
  std::size_t n_test_examples = 0;
  std::vector<std::string> warnings;
};

// Throws std::logic_error when a test conversation reached PCA fitting or
// model training, or when an out-of-fold model saw its own conversation.
void check_no_leakage(const PreparedData &prepared, const StackedForecaster &model);

SpecResult run_window(const CorpusData &data, const PreparedData &prepared,
                      const std::string &id, const WindowConfig &window,
                      const PipelineOptions &opts);
SpecResult run_spec(const CorpusData &data, const PreparedData &prepared,
                    const ExperimentSpec &spec, const PipelineOptions &opts);

struct GridResult {
  std::vector<SpecResult> results;
  SessionSplit split;
  std::string learner;
  std::uint64_t seed = 0;
};

GridResult run_grid(const CorpusData &data, const std::vector<ExperimentSpec> &specs,
                    const PipelineOptions &opts);

nlohmann::json spec_report_json(const SpecResult &result);
nlohmann::json grid_report_json(const GridResult &grid);
std::string tables_markdown(const GridResult &grid);
// out/report.json, out/tables.md, out/horizons.csv, out/confusion.csv and
// out/<spec>/{report.json,confusion.csv}.
void write_grid(const std::filesystem::path &dir, const GridResult &grid);

}  // namespace emo
