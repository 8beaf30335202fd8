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
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "erfc/features.hpp"
#include "erfc/learners.hpp"

namespace emo {

struct TargetPrediction {
  std::vector<double> probs;
  int label = 0;  // argmax, lowest index on ties
};

// One entry per (slot, horizon) target, indexed by target_index(). Entries
// are nullopt once masked.
struct Prediction {
  std::vector<std::optional<TargetPrediction>> targets;

  // Drops entries whose target is masked in `truth`.
  void apply_mask(const std::vector<std::optional<int>> &truth);
};

int argmax_lowest(std::span<const double> probs);

enum class HistoryMode { kTeacherForced, kAutoregressive };

// Two-level stacking ensemble. Level 1 has one head per target trained on x.
// Level 2 has one head per target trained on x concatenated with the
// out-of-fold level-1 probabilities of all targets; folds are assigned per
// conversation so a row's stacked features never come from a model that saw
// its own conversation.
class StackedForecaster {
 public:
  struct Options {
    std::string learner = "rf:100:12";
    std::uint64_t seed = 0;
    int oof_folds = 5;
  };

  // Throws kEmptyInput on no examples and kDimensionMismatch on ragged x.
  static StackedForecaster train(const std::vector<Example> &examples, const WindowConfig &cfg,
                                 const Options &options);

  Prediction predict(std::span<const double> x) const;
  std::vector<Prediction> predict_batch(const std::vector<Example> &examples) const;

  // Level-1 probabilities for all targets, concatenated in target order.
  std::vector<double> level1_probabilities(std::span<const double> x) const;

  const WindowConfig &config() const { return cfg_; }
  const Options &options() const { return options_; }
  int class_count() const { return cfg_.class_count(); }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t level2_dim() const {
    return input_dim_ + static_cast<std::size_t>(cfg_.n_targets() * class_count());
  }

  int fold_of(const std::string &conv_id) const;
  const std::map<std::string, int> &fold_assignment() const { return folds_; }
  // Conversations whose rows trained the level-1 heads of fold f.
  const std::vector<std::set<std::string>> &fold_training_ids() const { return fold_ids_; }
  const std::set<std::string> &train_conv_ids() const { return train_ids_; }
  const std::vector<std::string> &warnings() const { return warnings_; }

  const BaseLearner &level1_head(int target) const { return *level1_[static_cast<std::size_t>(target)]; }
  const BaseLearner &level2_head(int target) const { return *level2_[static_cast<std::size_t>(target)]; }

  nlohmann::json to_json() const;
  static StackedForecaster from_json(const nlohmann::json &j);
  void save(const std::filesystem::path &path) const;
  static StackedForecaster load(const std::filesystem::path &path);

 private:
  WindowConfig cfg_;
  Options options_;
  std::size_t input_dim_ = 0;
  std::map<std::string, int> folds_;
  std::vector<std::set<std::string>> fold_ids_;
  std::set<std::string> train_ids_;
  std::vector<std::unique_ptr<BaseLearner>> level1_;
  std::vector<std::unique_ptr<BaseLearner>> level2_;
  std::vector<std::string> warnings_;
};

// Fold of a conversation: a keyed hash of its conv_id, independent of the
// order in which examples are presented.
int conversation_fold(const std::string &conv_id, std::uint64_t seed, int folds);

// Per-turn predictions for a whole conversation. In autoregressive mode the
// emotion history is the model's own horizon-0 predictions instead of the
// ground truth; AVD history stays observed. Masks follow the conversation's
// turn structure.
std::vector<Prediction> predict_conversation(const StackedForecaster &model,
                                             const ExampleBuilder &builder,
                                             const TurnedConversation &conv, HistoryMode mode);

}  // namespace emo
