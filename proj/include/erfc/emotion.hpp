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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace emo {

// Six categorical emotions. The four-class scheme reuses Happy, Sad, Neutral
// and Angry after merging Excited into Happy and Frustrated into Angry.
enum class Emotion { kHappy, kExcited, kSad, kNeutral, kAngry, kFrustrated };

enum class Scheme { kSix, kFour };

int class_count(Scheme scheme);

// Names in encoding order for the scheme.
std::vector<std::string> class_names(Scheme scheme);

std::string_view emotion_name(Emotion e);

// Accepts canonical names case-insensitively and the short IEMOCAP codes
// (hap, exc, sad, neu, ang, fru). Returns nullopt for anything else.
std::optional<Emotion> parse_emotion(std::string_view s);

std::optional<Scheme> parse_scheme(std::string_view s);
std::string_view scheme_name(Scheme scheme);

bool valid_in(Emotion e, Scheme scheme);

Emotion merge_to_four(Emotion e);

// Fixed bijection per scheme:
//   six:  Happy=0 Excited=1 Sad=2 Neutral=3 Angry=4 Frustrated=5
//   four: Happy=0 Sad=1 Neutral=2 Angry=3
// Throws UsageError when e is not a member of the scheme.
int encode_emotion(Emotion e, Scheme scheme);
Emotion decode_emotion(int code, Scheme scheme);

// Activation, valence, dominance on the 1..5 annotation scale.
struct AvdTriple {
  double activation = 3.0;
  double valence = 3.0;
  double dominance = 3.0;

  std::array<double, 3> as_array() const {
    return {activation, valence, dominance};
  }
  bool in_range() const;
  bool operator==(const AvdTriple &) const = default;
};

}  // namespace emo
