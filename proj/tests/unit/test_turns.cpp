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

#include <map>
#include <sstream>

#include "erfc/corpus.hpp"
#include "erfc/error.hpp"
#include "erfc/seeding.hpp"
#include "erfc/turns.hpp"
#include "test_support.hpp"

using namespace emo;
using emo::testing::fixture;

namespace {

UtteranceRecord utt(const std::string &id, const std::string &spk, double t0, double t1,
                    Emotion e, std::optional<AvdTriple> avd = std::nullopt) {
  UtteranceRecord u;
  u.conv_id = "Ses01_x";
  u.utt_id = id;
  u.speaker = spk;
  u.t_start = t0;
  u.t_end = t1;
  u.text = id;
  u.emotion = e;
  u.avd = avd;
  return u;
}

int count_runs(const Conversation &c) {
  int runs = 0;
  for (std::size_t i = 0; i < c.utterances.size(); ++i)
    if (i == 0 || c.utterances[i].speaker != c.utterances[i - 1].speaker) ++runs;
  return runs;
}

Conversation random_conversation(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<int> len(1, 40);
  std::bernoulli_distribution sw(0.6);
  Conversation c;
  c.conv_id = "Ses01_r" + std::to_string(seed);
  std::string spk = "A";
  const int n = len(rng);
  double t = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i > 0 && sw(rng)) spk = spk == "A" ? "B" : "A";
    c.utterances.push_back(utt("u" + std::to_string(i), spk, t, t + 1.0,
                               static_cast<Emotion>(rng() % 6)));
    t += 1.5;
  }
  return c;
}

}  // namespace

TEST_SUITE("turns") {
  TEST_CASE("fixture turns") {
    auto convs = assemble_all(load_utterances(fixture("good/two_conv.jsonl")));
    REQUIRE(convs.size() == 2);
    const auto &a = convs[0].turns;
    REQUIRE(a.size() == 3);
    CHECK(a[0].sides[0].utt_ids == std::vector<std::string>{"c1_u1", "c1_u2"});
    CHECK(a[0].sides[0].label == Emotion::kHappy);
    CHECK(a[0].sides[0].merged_text == "hello there");
    CHECK(a[0].sides[1].utt_ids == std::vector<std::string>{"c1_u3"});
    CHECK(a[1].sides[1].utt_ids == std::vector<std::string>{"c1_u5", "c1_u6"});
    // Single votes each; the longer utterance decides.
    CHECK(a[1].sides[1].label == Emotion::kFrustrated);
    CHECK(a[1].sides[1].merged_text == "stop just stop");
    CHECK(a[2].sides[0].label == Emotion::kExcited);
    CHECK_FALSE(a[2].sides[1].present);
    CHECK(a[2].sides[1].slot == 1);

    REQUIRE(a[0].sides[0].avd.has_value());
    CHECK(a[0].sides[0].avd->activation == doctest::Approx((3.5 * 1.0 + 3.0 * 0.9) / 1.9));
    CHECK(a[0].sides[0].avd->valence == doctest::Approx((4.0 * 1.0 + 3.5 * 0.9) / 1.9));
    CHECK(a[0].sides[0].avd->dominance == doctest::Approx(3.0));

    const auto &b = convs[1].turns;
    REQUIRE(b.size() == 2);
    CHECK(b[0].sides[0].speaker == "M");
    CHECK(b[0].sides[1].speaker == "F");
    CHECK_FALSE(b[0].sides[0].avd.has_value());
    CHECK(b[1].sides[0].merged_text.empty());
    CHECK(b[1].sides[1].label == Emotion::kFrustrated);
  }

  TEST_CASE("feature keys cover present sides only") {
    auto convs = assemble_all(load_utterances(fixture("good/two_conv.jsonl")));
    auto keys = feature_keys(convs);
    CHECK(keys.size() == 9);
    CHECK(keys.count({"Ses01_conv0001", 2, 0}) == 1);
    CHECK(keys.count({"Ses01_conv0001", 2, 1}) == 0);
  }

  TEST_CASE("count law, conservation and alternation on random conversations") {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
      auto c = random_conversation(seed);
      auto turns = assemble_turns(c);
      const int runs = count_runs(c);
      CHECK(static_cast<int>(turns.size()) == (runs + 1) / 2);
      std::map<std::string, int> seen;
      std::size_t total = 0;
      for (std::size_t i = 0; i < turns.size(); ++i) {
        CHECK(turns[i].turn_index == static_cast<int>(i));
        for (const auto &s : turns[i].sides) {
          for (const auto &id : s.utt_ids) ++seen[id];
          total += s.utt_ids.size();
        }
        if (i + 1 < turns.size()) {
          CHECK(turns[i].sides[0].present);
          CHECK(turns[i].sides[1].present);
          CHECK(turns[i].sides[0].speaker != turns[i].sides[1].speaker);
        }
      }
      CHECK(total == c.utterances.size());
      CHECK(seen.size() == c.utterances.size());
      for (auto &[id, n] : seen) CHECK(n == 1);
      CHECK(turns.back().sides[1].present == (runs % 2 == 0));
      // Pure function of the input.
      auto again = assemble_turns(c);
      for (std::size_t i = 0; i < turns.size(); ++i)
        for (int s = 0; s < 2; ++s) CHECK(again[i].sides[s].utt_ids == turns[i].sides[s].utt_ids);
    }
  }

  TEST_CASE("label lifting: majority, then longest, then earliest") {
    std::vector<UtteranceRecord> run{utt("a", "A", 0, 5, Emotion::kSad),
                                     utt("b", "A", 5, 6, Emotion::kAngry),
                                     utt("c", "A", 6, 7, Emotion::kAngry)};
    CHECK(lift_labels(run).first == Emotion::kAngry);

    run = {utt("a", "A", 0, 1, Emotion::kSad), utt("b", "A", 1, 3, Emotion::kNeutral)};
    CHECK(lift_labels(run).first == Emotion::kNeutral);

    run = {utt("a", "A", 0, 2, Emotion::kExcited), utt("b", "A", 2, 4, Emotion::kHappy)};
    CHECK(lift_labels(run).first == Emotion::kExcited);
    run = {utt("a", "A", 0, 2, Emotion::kHappy), utt("b", "A", 2, 4, Emotion::kExcited)};
    CHECK(lift_labels(run).first == Emotion::kHappy);
  }

  TEST_CASE("AVD is the duration-weighted mean of annotated utterances") {
    std::vector<UtteranceRecord> run{utt("a", "A", 0, 1, Emotion::kSad, AvdTriple{1, 2, 3}),
                                     utt("b", "A", 1, 4, Emotion::kSad, AvdTriple{5, 2, 1}),
                                     utt("c", "A", 4, 9, Emotion::kSad)};
    auto avd = lift_labels(run).second;
    REQUIRE(avd.has_value());
    CHECK(avd->activation == doctest::Approx(4.0));
    CHECK(avd->valence == doctest::Approx(2.0));
    CHECK(avd->dominance == doctest::Approx(1.5));
    run.pop_back();
    run.erase(run.begin());
    CHECK(lift_labels(run).second == AvdTriple{5, 2, 1});
    std::vector<UtteranceRecord> none{utt("c", "A", 4, 9, Emotion::kSad)};
    CHECK_FALSE(lift_labels(none).second.has_value());
  }

  TEST_CASE("empty conversation is rejected") {
    Conversation c{"Ses01_empty", {}};
    CHECK_THROWS_AS(assemble_turns(c), ValidationError);
  }

  TEST_CASE("turn dump lists both slots") {
    auto convs = assemble_all(load_utterances(fixture("good/two_conv.jsonl")));
    std::stringstream out;
    write_turn_dump(out, convs);
    const std::string s = out.str();
    CHECK(s.rfind("conv_id,turn,slot,speaker,n_utts,label\n", 0) == 0);
    CHECK(s.find("Ses01_conv0001,2,1,,0,\n") != std::string::npos);
    CHECK(s.find("Ses01_conv0001,1,1,B,2,Frustrated\n") != std::string::npos);
  }
}
