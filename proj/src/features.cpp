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

#include "erfc/features.hpp"

#include <fmt/format.h>

#include "erfc/error.hpp"
#include "erfc/seeding.hpp"

namespace emo {

WindowConfig WindowConfig::uniform(int w, int k, bool use_avd, Scheme scheme) {
  WindowConfig cfg;
  cfg.w_text = cfg.w_audio = cfg.w_speaker = cfg.w_emotion = w;
  cfg.k = k;
  cfg.use_avd = use_avd;
  cfg.scheme = scheme;
  return cfg;
}

void WindowConfig::validate() const {
  if (w_text < 0 || w_audio < 0 || w_speaker < 0 || w_emotion < 0)
    throw UsageError("context windows must be >= 0");
  if (k < 0) throw UsageError("forecast horizon k must be >= 0");
}

nlohmann::json to_json(const WindowConfig &cfg) {
  return {{"w_text", cfg.w_text},       {"w_audio", cfg.w_audio},
          {"w_speaker", cfg.w_speaker}, {"w_emotion", cfg.w_emotion},
          {"k", cfg.k},                 {"use_avd", cfg.use_avd},
          {"scheme", std::string(scheme_name(cfg.scheme))}};
}

WindowConfig window_from_json(const nlohmann::json &j) {
  WindowConfig cfg;
  cfg.w_text = j.at("w_text").get<int>();
  cfg.w_audio = j.at("w_audio").get<int>();
  cfg.w_speaker = j.at("w_speaker").get<int>();
  cfg.w_emotion = j.at("w_emotion").get<int>();
  cfg.k = j.at("k").get<int>();
  cfg.use_avd = j.at("use_avd").get<bool>();
  auto scheme = parse_scheme(j.at("scheme").get<std::string>());
  if (!scheme) throw UsageError("unknown scheme in window config");
  cfg.scheme = *scheme;
  cfg.validate();
  return cfg;
}

std::size_t example_dim(const WindowConfig &cfg, const FeatureDims &dims) {
  const std::size_t per_speaker =
      static_cast<std::size_t>(cfg.w_text + 1) * dims.text +
      static_cast<std::size_t>(cfg.w_audio + 1) * dims.audio +
      static_cast<std::size_t>(cfg.w_speaker + 1) * dims.speaker +
      static_cast<std::size_t>(cfg.w_emotion) * (cfg.use_avd ? 4u : 1u);
  return 2 * per_speaker;
}

int encode_for(Emotion e, Scheme scheme) {
  return encode_emotion(scheme == Scheme::kFour ? merge_to_four(e) : e, scheme);
}

History true_history(const TurnedConversation &conv, Scheme scheme) {
  History h(conv.turns.size());
  for (std::size_t t = 0; t < conv.turns.size(); ++t)
    for (int s = 0; s < 2; ++s) {
      const auto &side = conv.turns[t].sides[s];
      if (side.present && side.label) h[t][s] = encode_for(*side.label, scheme);
    }
  return h;
}

FeatureSet reduce_features(const FeatureStore &text, const FeatureStore &audio,
                           const FeatureStore &speaker, const PcaModel *audio_pca,
                           const PcaModel *speaker_pca) {
  FeatureSet set;
  set.text = text;
  set.audio = audio_pca ? transform_store(*audio_pca, audio) : audio;
  set.speaker = speaker_pca ? transform_store(*speaker_pca, speaker) : speaker;
  return set;
}

ExampleBuilder::ExampleBuilder(WindowConfig cfg, const FeatureSet &features)
    : cfg_(cfg), features_(features), dim_(example_dim(cfg, features.dims())) {
  cfg_.validate();
}

void ExampleBuilder::check_requirements(const TurnedConversation &conv) const {
  for (const auto &turn : conv.turns) {
    for (const auto &side : turn.sides) {
      if (!side.present) continue;
      const FeatureKey key{conv.conv_id, turn.turn_index, side.slot};
      for (const FeatureStore *store :
           {&features_.text, &features_.audio, &features_.speaker}) {
        if (store->dim() > 0 && !store->contains(key))
          throw ValidationError(ErrorKind::kMissingFeature,
                                fmt::format("no {} feature for {}",
                                            modality_name(store->modality()),
                                            to_string(key)));
      }
      if (cfg_.use_avd && !side.avd)
        throw ValidationError(
            ErrorKind::kMissingAvd,
            fmt::format("AVD required but missing for utterance {} (conversation {})",
                        side.utt_ids.front(), conv.conv_id));
    }
  }
}

void ExampleBuilder::append_modal(std::vector<double> &x, const FeatureStore &store,
                                  int window, const TurnedConversation &conv, int t,
                                  int slot) const {
  const std::size_t d = store.dim();
  if (d == 0) return;
  for (int lag = 0; lag <= window; ++lag) {
    const int turn = t - lag;
    std::optional<std::span<const double>> v;
    if (turn >= 0 && conv.turns[static_cast<std::size_t>(turn)].sides[slot].present)
      v = store.find({conv.conv_id, turn, slot});
    if (v)
      x.insert(x.end(), v->begin(), v->end());
    else
      x.insert(x.end(), d, 0.0);
  }
}

std::vector<double> ExampleBuilder::build_x(const TurnedConversation &conv, int t,
                                            const History &history) const {
  std::vector<double> x;
  x.reserve(dim_);
  for (int slot = 0; slot < 2; ++slot) {
    append_modal(x, features_.text, cfg_.w_text, conv, t, slot);
    append_modal(x, features_.audio, cfg_.w_audio, conv, t, slot);
    append_modal(x, features_.speaker, cfg_.w_speaker, conv, t, slot);
    for (int lag = 1; lag <= cfg_.w_emotion; ++lag) {
      const int turn = t - lag;
      std::optional<int> code;
      const SpeakerTurnSide *side = nullptr;
      if (turn >= 0) {
        side = &conv.turns[static_cast<std::size_t>(turn)].sides[slot];
        if (side->present) code = history[static_cast<std::size_t>(turn)][slot];
        else side = nullptr;
      }
      x.push_back(static_cast<double>(code.value_or(cfg_.no_history_code())));
      if (cfg_.use_avd) {
        if (side && side->avd) {
          for (double v : side->avd->as_array()) x.push_back((v - 1.0) / 4.0);
        } else {
          x.insert(x.end(), 3, 0.0);
        }
      }
    }
  }
  return x;
}

std::vector<std::optional<int>> ExampleBuilder::build_targets(const TurnedConversation &conv,
                                                              int t) const {
  std::vector<std::optional<int>> targets(static_cast<std::size_t>(cfg_.n_targets()));
  const int n_turns = static_cast<int>(conv.turns.size());
  for (int slot = 0; slot < 2; ++slot)
    for (int h = 0; h <= cfg_.k; ++h) {
      if (t + h >= n_turns) continue;
      const auto &side = conv.turns[static_cast<std::size_t>(t + h)].sides[slot];
      if (side.present && side.label)
        targets[static_cast<std::size_t>(target_index(slot, h, cfg_.k))] =
            encode_for(*side.label, cfg_.scheme);
    }
  return targets;
}

std::vector<Example> ExampleBuilder::build_conversation(const TurnedConversation &conv) const {
  check_requirements(conv);
  const History history = true_history(conv, cfg_.scheme);
  std::vector<Example> out;
  out.reserve(conv.turns.size());
  for (int t = 0; t < static_cast<int>(conv.turns.size()); ++t)
    out.push_back({conv.conv_id, t, build_x(conv, t, history), build_targets(conv, t)});
  return out;
}

std::vector<Example> build_examples(const std::vector<TurnedConversation> &convs,
                                    const FeatureSet &features, const WindowConfig &cfg) {
  ExampleBuilder builder(cfg, features);
  // Checked in order first so the reported error is always the earliest one.
  for (const auto &conv : convs) builder.check_requirements(conv);
  std::vector<std::vector<Example>> per_conv(convs.size());
  parallel_for(convs.size(), [&](std::size_t i) {
    per_conv[i] = builder.build_conversation(convs[i]);
  });
  std::vector<Example> out;
  for (auto &v : per_conv)
    for (auto &e : v) out.push_back(std::move(e));
  return out;
}

}  // namespace emo
