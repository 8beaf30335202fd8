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

#include <doctest.h>

#include <cmath>

#include "erfc/emotion.hpp"
#include "erfc/error.hpp"

using namespace emo;

TEST_SUITE("emotion") {
  TEST_CASE("six-class codes round-trip") {
    CHECK(class_count(Scheme::kSix) == 6);
    for (int c = 0; c < 6; ++c) CHECK(encode_emotion(decode_emotion(c, Scheme::kSix), Scheme::kSix) == c);
    CHECK(class_names(Scheme::kSix) ==
          std::vector<std::string>{"Happy", "Excited", "Sad", "Neutral", "Angry", "Frustrated"});
  }

  TEST_CASE("four-class scheme merges excited and frustrated") {
    CHECK(class_names(Scheme::kFour) == std::vector<std::string>{"Happy", "Sad", "Neutral", "Angry"});
    CHECK(merge_to_four(Emotion::kExcited) == Emotion::kHappy);
    CHECK(merge_to_four(Emotion::kFrustrated) == Emotion::kAngry);
    CHECK(merge_to_four(Emotion::kSad) == Emotion::kSad);
    CHECK_FALSE(valid_in(Emotion::kExcited, Scheme::kFour));
    CHECK(valid_in(Emotion::kExcited, Scheme::kSix));
    CHECK_THROWS_AS(encode_emotion(Emotion::kFrustrated, Scheme::kFour), UsageError);
    CHECK_THROWS_AS(decode_emotion(4, Scheme::kFour), UsageError);
    CHECK_THROWS_AS(decode_emotion(-1, Scheme::kSix), UsageError);
  }

  TEST_CASE("label parsing accepts names and short codes") {
    CHECK(parse_emotion("Happy") == Emotion::kHappy);
    CHECK(parse_emotion("hap") == Emotion::kHappy);
    CHECK(parse_emotion("EXC") == Emotion::kExcited);
    CHECK(parse_emotion("fru") == Emotion::kFrustrated);
    CHECK(parse_emotion("neu") == Emotion::kNeutral);
    CHECK_FALSE(parse_emotion("Bored").has_value());
    CHECK_FALSE(parse_emotion("").has_value());
    CHECK(parse_scheme("four") == Scheme::kFour);
    CHECK(parse_scheme("6") == Scheme::kSix);
    CHECK_FALSE(parse_scheme("five").has_value());
  }

  TEST_CASE("AVD range is closed [1, 5]") {
    CHECK(AvdTriple{1.0, 5.0, 3.0}.in_range());
    CHECK_FALSE(AvdTriple{0.99, 3.0, 3.0}.in_range());
    CHECK_FALSE(AvdTriple{3.0, 5.01, 3.0}.in_range());
    CHECK_FALSE(AvdTriple{3.0, 3.0, std::nan("")}.in_range());
  }
}
