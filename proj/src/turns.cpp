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

#include "erfc/turns.hpp"

#include <map>
#include <ostream>

#include <fmt/format.h>

#include "erfc/error.hpp"

namespace emo {
namespace {

SpeakerTurnSide make_side(int slot, std::span<const UtteranceRecord> run) {
  SpeakerTurnSide side;
  side.slot = slot;
  side.present = true;
  side.speaker = run.front().speaker;
  for (const auto &u : run) side.utt_ids.push_back(u.utt_id);
  side.merged_text = concat_text(run);
  auto [label, avd] = lift_labels(run);
  side.label = label;
  side.avd = avd;
  return side;
}

}  // namespace

std::pair<Emotion, std::optional<AvdTriple>> lift_labels(
    std::span<const UtteranceRecord> run) {
  struct Tally {
    int count = 0;
    double longest = -1.0;
    std::size_t first = 0;
  };
  std::map<Emotion, Tally> tallies;
  for (std::size_t i = 0; i < run.size(); ++i) {
    auto [it, inserted] = tallies.try_emplace(run[i].emotion);
    Tally &t = it->second;
    if (inserted) t.first = i;
    ++t.count;
    t.longest = std::max(t.longest, run[i].duration());
  }
  Emotion best = run.front().emotion;
  const Tally *best_tally = nullptr;
  for (const auto &[emotion, t] : tallies) {
    bool better = best_tally == nullptr || t.count > best_tally->count ||
                  (t.count == best_tally->count &&
                   (t.longest > best_tally->longest ||
                    (t.longest == best_tally->longest && t.first < best_tally->first)));
    if (better) {
      best = emotion;
      best_tally = &t;
    }
  }

  double weight = 0.0;
  std::array<double, 3> acc{0.0, 0.0, 0.0};
  for (const auto &u : run) {
    if (!u.avd) continue;
    const double w = u.duration();
    const auto a = u.avd->as_array();
    for (int d = 0; d < 3; ++d) acc[d] += w * a[d];
    weight += w;
  }
  std::optional<AvdTriple> avd;
  if (weight > 0.0) avd = AvdTriple{acc[0] / weight, acc[1] / weight, acc[2] / weight};
  return {best, avd};
}

std::string concat_text(std::span<const UtteranceRecord> run) {
  std::string out;
  for (const auto &u : run) {
    if (!u.text || u.text->empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += *u.text;
  }
  return out;
}

std::vector<Turn> assemble_turns(const Conversation &conversation) {
  const auto &utts = conversation.utterances;
  if (utts.empty())
    throw ValidationError(ErrorKind::kEmptyInput,
                          fmt::format("conversation {} has no utterances",
                                      conversation.conv_id));

  std::vector<std::span<const UtteranceRecord>> runs;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= utts.size(); ++i) {
    if (i == utts.size() || utts[i].speaker != utts[start].speaker) {
      runs.emplace_back(utts.data() + start, i - start);
      start = i;
    }
  }

  std::vector<Turn> turns;
  turns.reserve((runs.size() + 1) / 2);
  for (std::size_t r = 0; r < runs.size(); r += 2) {
    Turn turn;
    turn.conv_id = conversation.conv_id;
    turn.turn_index = static_cast<int>(r / 2);
    turn.sides[0] = make_side(0, runs[r]);
    if (r + 1 < runs.size()) {
      turn.sides[1] = make_side(1, runs[r + 1]);
    } else {
      turn.sides[1].slot = 1;
    }
    turns.push_back(std::move(turn));
  }
  return turns;
}

std::vector<TurnedConversation> assemble_all(const std::vector<Conversation> &convs) {
  std::vector<TurnedConversation> out;
  out.reserve(convs.size());
  for (const auto &c : convs) out.push_back({c.conv_id, assemble_turns(c)});
  return out;
}

std::set<FeatureKey> feature_keys(const std::vector<TurnedConversation> &convs) {
  std::set<FeatureKey> keys;
  for (const auto &c : convs)
    for (const auto &t : c.turns)
      for (const auto &s : t.sides)
        if (s.present) keys.insert({c.conv_id, t.turn_index, s.slot});
  return keys;
}

void write_turn_dump(std::ostream &out, const std::vector<TurnedConversation> &convs) {
  out << "conv_id,turn,slot,speaker,n_utts,label\n";
  for (const auto &c : convs)
    for (const auto &t : c.turns)
      for (const auto &s : t.sides)
        out << fmt::format("{},{},{},{},{},{}\n", c.conv_id, t.turn_index, s.slot,
                           s.present ? s.speaker : "", s.utt_ids.size(),
                           s.label ? emotion_name(*s.label) : "");
}

}  // namespace emo
