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

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "erfc/corpus.hpp"
#include "erfc/features.hpp"

namespace emo {

using Matrix = std::vector<std::vector<double>>;

// Coupled two-speaker emotion process with class-centred Gaussian emissions.
// Speaker i's label at turn t+1 is drawn from
//   alpha * p_cross[partner label at t] + (1 - alpha) * p_self[own label at t].
struct SynthConfig {
  int n_classes = 6;
  double t_mean = 10.0;
  int n_conversations = 200;
  int n_sessions = 5;
  double alpha = 0.5;
  Matrix p_self;
  Matrix p_cross;
  // Distance between any two emission centres, per modality.
  double separation = 2.0;
  // Classes sharing a group share their emission centre.
  std::vector<int> emission_groups;
  std::vector<std::array<double, 3>> avd_means;
  double avd_noise = 0.5;
  // AVD of turn t is centred on (1 - lead) * mean[label t] + lead * mean[label t+1].
  double avd_lead = 0.0;
  bool emit_avd = true;
  // Probability that the last turn lacks its second speaker.
  double trailing_prob = 0.1;
  FeatureDims dims{16, 32, 16};
  std::uint64_t seed = 0;

  Scheme label_scheme() const;
  int n_groups() const;
  // Throws UsageError describing the first violated constraint.
  void validate() const;
};

nlohmann::json to_json(const SynthConfig &cfg);
SynthConfig synth_config_from_json(const nlohmann::json &j);

// Named parameter sets: default, separable, influence, avd, merge.
SynthConfig synth_preset(const std::string &name, std::uint64_t seed = 0);
std::vector<std::string> synth_preset_names();

// Joint chain over (slot-0 label, slot-1 label), state a * C + b.
Eigen::MatrixXd joint_transition(const SynthConfig &cfg);
Eigen::VectorXd joint_stationary(const SynthConfig &cfg);

// Label-only run of the joint chain started from its stationary distribution.
std::vector<std::array<int, 2>> simulate_chain(const SynthConfig &cfg, std::size_t n_turns,
                                               std::uint64_t seed);

struct EmissionCentres {
  // Per modality: n_groups x dim, pairwise distance equal to the separation.
  Eigen::MatrixXd text;
  Eigen::MatrixXd audio;
  Eigen::MatrixXd speaker;
};
EmissionCentres emission_centres(const SynthConfig &cfg);

struct SynthTruth {
  SynthConfig cfg;
  // Per conversation and turn, the class code of each slot; -1 for an absent side.
  std::map<std::string, std::vector<std::array<int, 2>>> labels;
};

struct SynthCorpus {
  std::vector<Conversation> conversations;
  FeatureStore text;
  FeatureStore audio;
  FeatureStore speaker;
  SynthTruth truth;
};

SynthCorpus generate(const SynthConfig &cfg);

// utterances.jsonl, text.csv, audio.csv, speaker.csv, truth.json
void write_synth(const std::filesystem::path &dir, const SynthCorpus &corpus);
nlohmann::json truth_to_json(const SynthTruth &truth);

}  // namespace emo
