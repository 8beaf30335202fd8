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
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "erfc/corpus.hpp"

namespace emo {

struct SpeakerTurnSide {
  int slot = 0;
  bool present = false;
  std::string speaker;
  std::vector<std::string> utt_ids;
  std::string merged_text;
  std::optional<Emotion> label;
  std::optional<AvdTriple> avd;
};

// A turn is a run of utterances by the slot-0 speaker followed by a run by
// the slot-1 speaker. Only the last turn of a conversation may miss a side.
struct Turn {
  std::string conv_id;
  int turn_index = 0;
  std::array<SpeakerTurnSide, 2> sides;
};

struct TurnedConversation {
  std::string conv_id;
  std::vector<Turn> turns;
};

// Groups maximal same-speaker runs and pairs run 2i with run 2i+1 into turn i.
// Slot 0 is whoever speaks first. Throws kEmptyInput for an empty conversation.
std::vector<Turn> assemble_turns(const Conversation &conversation);

std::vector<TurnedConversation> assemble_all(const std::vector<Conversation> &convs);

// Label of a single-speaker run: the most frequent utterance label. Ties go to
// the label carrying the longest utterance, then to the earliest one. AVD is
// the duration-weighted mean over utterances that have one.
std::pair<Emotion, std::optional<AvdTriple>> lift_labels(
    std::span<const UtteranceRecord> run);

// Utterance texts joined with single spaces; null texts are skipped.
std::string concat_text(std::span<const UtteranceRecord> run);

// (conv_id, turn, slot) for every present side; the set a feature file must
// stay inside.
std::set<FeatureKey> feature_keys(const std::vector<TurnedConversation> &convs);

// Audit dump: conv_id,turn,slot,speaker,n_utts,label
void write_turn_dump(std::ostream &out, const std::vector<TurnedConversation> &convs);

}  // namespace emo
