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
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "erfc/corpus.hpp"
#include "erfc/emotion.hpp"
#include "erfc/pca.hpp"
#include "erfc/turns.hpp"

namespace emo {

// Context widths (in turns) per modality and the forecast horizon.
// Text/audio/speaker windows include the current turn; the emotion window
// covers t-1 .. t-w_emotion only.
struct WindowConfig {
  int w_text = 3;
  int w_audio = 3;
  int w_speaker = 3;
  int w_emotion = 3;
  int k = 3;
  bool use_avd = true;
  Scheme scheme = Scheme::kSix;

  static WindowConfig uniform(int w, int k = 3, bool use_avd = true,
                              Scheme scheme = Scheme::kSix);

  int class_count() const { return emo::class_count(scheme); }
  // Emotion code used for turns before the conversation start and for
  // absent sides: one past the real classes.
  int no_history_code() const { return class_count(); }
  int n_targets() const { return 2 * (k + 1); }
  void validate() const;

  bool operator==(const WindowConfig &) const = default;
};

nlohmann::json to_json(const WindowConfig &cfg);
WindowConfig window_from_json(const nlohmann::json &j);

struct FeatureDims {
  std::size_t text = 0;
  std::size_t audio = 0;
  std::size_t speaker = 0;

  bool operator==(const FeatureDims &) const = default;
};

// 2 * [(w_t+1)d_text + (w_a+1)d_audio + (w_s+1)d_spk + w_e(1 + 3 use_avd)]
std::size_t example_dim(const WindowConfig &cfg, const FeatureDims &dims);

inline int target_index(int slot, int horizon, int k) { return slot * (k + 1) + horizon; }

struct Example {
  std::string conv_id;
  int t = 0;
  std::vector<double> x;
  // Indexed by target_index(slot, horizon, k); nullopt means masked.
  std::vector<std::optional<int>> targets;
};

// Emotion code per turn and slot used as history input; nullopt stands for
// "no label available" and is encoded as the no-history code.
using History = std::vector<std::array<std::optional<int>, 2>>;

// Encodes a side label under the scheme, merging six-class labels first when
// the scheme is four-class.
int encode_for(Emotion e, Scheme scheme);

// Ground-truth history of a conversation (teacher forcing).
History true_history(const TurnedConversation &conv, Scheme scheme);

// The modality stores an ExampleBuilder reads. Audio and speaker stores are
// expected to be PCA-reduced already; a store of dimension 0 switches the
// modality off.
struct FeatureSet {
  FeatureStore text;
  FeatureStore audio;
  FeatureStore speaker;

  FeatureDims dims() const { return {text.dim(), audio.dim(), speaker.dim()}; }
};

// Applies the optional PCA models (audio, speaker) to raw stores.
FeatureSet reduce_features(const FeatureStore &text, const FeatureStore &audio,
                           const FeatureStore &speaker, const PcaModel *audio_pca,
                           const PcaModel *speaker_pca);

class ExampleBuilder {
 public:
  ExampleBuilder(WindowConfig cfg, const FeatureSet &features);

  const WindowConfig &config() const { return cfg_; }
  std::size_t dim() const { return dim_; }

  // Throws kMissingFeature for a present side without a vector and, when
  // use_avd is set, kMissingAvd citing the first utterance of the offending
  // side.
  void check_requirements(const TurnedConversation &conv) const;

  // Input vector for turn t. Only history entries for turns < t are read.
  std::vector<double> build_x(const TurnedConversation &conv, int t,
                              const History &history) const;
  std::vector<std::optional<int>> build_targets(const TurnedConversation &conv,
                                                int t) const;

  // One example per turn, teacher-forced history.
  std::vector<Example> build_conversation(const TurnedConversation &conv) const;

 private:
  void append_modal(std::vector<double> &x, const FeatureStore &store, int window,
                    const TurnedConversation &conv, int t, int slot) const;

  WindowConfig cfg_;
  const FeatureSet &features_;
  std::size_t dim_;
};

// Examples for every turn of every conversation (parallel per conversation;
// output order follows `convs`).
std::vector<Example> build_examples(const std::vector<TurnedConversation> &convs,
                                    const FeatureSet &features, const WindowConfig &cfg);

}  // namespace emo
