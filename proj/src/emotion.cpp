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

#include "erfc/emotion.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "erfc/error.hpp"

namespace emo {
namespace {

constexpr std::array<Emotion, 4> kFourOrder = {
    Emotion::kHappy, Emotion::kSad, Emotion::kNeutral, Emotion::kAngry};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

int class_count(Scheme scheme) { return scheme == Scheme::kSix ? 6 : 4; }

std::vector<std::string> class_names(Scheme scheme) {
  std::vector<std::string> names;
  for (int c = 0; c < class_count(scheme); ++c)
    names.emplace_back(emotion_name(decode_emotion(c, scheme)));
  return names;
}

std::string_view emotion_name(Emotion e) {
  switch (e) {
    case Emotion::kHappy: return "Happy";
    case Emotion::kExcited: return "Excited";
    case Emotion::kSad: return "Sad";
    case Emotion::kNeutral: return "Neutral";
    case Emotion::kAngry: return "Angry";
    case Emotion::kFrustrated: return "Frustrated";
  }
  return "?";
}

std::optional<Emotion> parse_emotion(std::string_view s) {
  const std::string l = lower(s);
  if (l == "happy" || l == "hap") return Emotion::kHappy;
  if (l == "excited" || l == "exc") return Emotion::kExcited;
  if (l == "sad") return Emotion::kSad;
  if (l == "neutral" || l == "neu") return Emotion::kNeutral;
  if (l == "angry" || l == "ang") return Emotion::kAngry;
  if (l == "frustrated" || l == "fru") return Emotion::kFrustrated;
  return std::nullopt;
}

std::optional<Scheme> parse_scheme(std::string_view s) {
  const std::string l = lower(s);
  if (l == "six" || l == "6") return Scheme::kSix;
  if (l == "four" || l == "4") return Scheme::kFour;
  return std::nullopt;
}

std::string_view scheme_name(Scheme scheme) {
  return scheme == Scheme::kSix ? "six" : "four";
}

bool valid_in(Emotion e, Scheme scheme) {
  if (scheme == Scheme::kSix) return true;
  return e != Emotion::kExcited && e != Emotion::kFrustrated;
}

Emotion merge_to_four(Emotion e) {
  if (e == Emotion::kExcited) return Emotion::kHappy;
  if (e == Emotion::kFrustrated) return Emotion::kAngry;
  return e;
}

int encode_emotion(Emotion e, Scheme scheme) {
  if (scheme == Scheme::kSix) return static_cast<int>(e);
  auto it = std::find(kFourOrder.begin(), kFourOrder.end(), e);
  if (it == kFourOrder.end())
    throw UsageError("emotion " + std::string(emotion_name(e)) +
                     " is not part of the four-class scheme");
  return static_cast<int>(it - kFourOrder.begin());
}

Emotion decode_emotion(int code, Scheme scheme) {
  if (code < 0 || code >= class_count(scheme))
    throw UsageError("emotion code " + std::to_string(code) +
                     " out of range for scheme " +
                     std::string(scheme_name(scheme)));
  if (scheme == Scheme::kSix) return static_cast<Emotion>(code);
  return kFourOrder[static_cast<size_t>(code)];
}

bool AvdTriple::in_range() const {
  for (double v : as_array())
    if (!std::isfinite(v) || v < 1.0 || v > 5.0) return false;
  return true;
}

}  // namespace emo
