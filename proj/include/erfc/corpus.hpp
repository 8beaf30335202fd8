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

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "erfc/emotion.hpp"

namespace emo {

// One diarized utterance as read from the utterance JSONL file.
struct UtteranceRecord {
  std::string conv_id;
  std::string utt_id;
  std::string speaker;
  double t_start = 0.0;
  double t_end = 0.0;
  std::optional<std::string> text;
  Emotion emotion = Emotion::kNeutral;
  std::optional<AvdTriple> avd;

  double duration() const { return t_end - t_start; }
  bool operator==(const UtteranceRecord &) const = default;
};

// Utterances of one dyadic conversation sorted by t_start.
struct Conversation {
  std::string conv_id;
  std::vector<UtteranceRecord> utterances;
};

// Reads the JSONL utterance format, groups by conv_id (conversations come back
// sorted by conv_id, utterances by t_start) and validates every invariant.
// Throws ValidationError naming the file and line on the first problem.
std::vector<Conversation> load_utterances(const std::filesystem::path &path);
std::vector<Conversation> parse_utterances(std::istream &in,
                                           std::string_view source);

// Groups loose records into validated conversations. Shared by the loader and
// the synthetic generator.
std::vector<Conversation> group_conversations(std::vector<UtteranceRecord> records);

void write_utterances(std::ostream &out, const std::vector<Conversation> &convs);
void save_utterances(const std::filesystem::path &path,
                     const std::vector<Conversation> &convs);

std::size_t record_count(const std::vector<Conversation> &convs);

// Session number from the "SesNN_..." conv_id convention. An entry in
// `overrides` wins over the prefix. Throws kUnknownSession otherwise.
int session_of(const std::string &conv_id,
               const std::map<std::string, int> &overrides = {});

enum class Modality { kText, kAudio, kSpeaker };

std::string_view modality_name(Modality m);
std::optional<Modality> parse_modality(std::string_view s);

struct FeatureKey {
  std::string conv_id;
  int turn = 0;
  int slot = 0;

  auto operator<=>(const FeatureKey &) const = default;
};

std::string to_string(const FeatureKey &key);

// Per-modality vectors keyed by (conv_id, turn, slot), stored contiguously.
// Dimension is uniform across the store; zero is allowed and means the
// modality is switched off.
class FeatureStore {
 public:
  FeatureStore() = default;
  FeatureStore(Modality modality, std::size_t dim)
      : modality_(modality), dim_(dim) {}

  Modality modality() const { return modality_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }

  // Throws kDuplicateKey / kDimensionMismatch.
  void insert(const FeatureKey &key, std::span<const double> values);

  bool contains(const FeatureKey &key) const { return index_.count(key) > 0; }
  // Empty optional when the key is absent.
  std::optional<std::span<const double>> find(const FeatureKey &key) const;

  std::vector<FeatureKey> keys() const;

  bool operator==(const FeatureStore &other) const = default;

 private:
  Modality modality_ = Modality::kText;
  std::size_t dim_ = 0;
  std::map<FeatureKey, std::size_t> index_;
  std::vector<double> values_;
};

// Reads the feature CSV (`conv_id,turn,slot,f0,...,f{D-1}`). When `known` is
// given, every row must reference a key in it (kDanglingKey otherwise).
FeatureStore load_features(const std::filesystem::path &path, Modality modality,
                           const std::set<FeatureKey> *known = nullptr);
FeatureStore parse_features(std::istream &in, Modality modality,
                            std::string_view source,
                            const std::set<FeatureKey> *known = nullptr);

void validate_keys(const FeatureStore &store, const std::set<FeatureKey> &known);

void write_features(std::ostream &out, const FeatureStore &store);
void save_features(const std::filesystem::path &path, const FeatureStore &store);

}  // namespace emo
