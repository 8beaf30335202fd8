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

#include "erfc/error.hpp"
#include "erfc/run_config.hpp"
#include "test_support.hpp"

using namespace emo;

TEST_SUITE("run_config") {
  TEST_CASE("JSON round-trip") {
    RunConfig c;
    c.corpus = "data/utterances.jsonl";
    c.text = "data/text.csv";
    c.window = WindowConfig::uniform(2, 4, false, Scheme::kFour);
    c.pipeline.learner = "logreg:0.5";
    c.pipeline.seed = 99;
    c.pipeline.mode = HistoryMode::kAutoregressive;
    c.pipeline.session_overrides = {{"odd", 3}};
    c.specs = "E1,E2";
    c.synth_preset = "merge";
    c.synth_overrides = {{"n_conversations", 12}};
    auto back = run_config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
    CHECK(back.window == c.window);
    CHECK(back.pipeline.mode == HistoryMode::kAutoregressive);
  }

  TEST_CASE("partial documents keep the base values") {
    RunConfig base;
    base.pipeline.seed = 5;
    auto c = run_config_from_json({{"learner", "rf:10:4"}}, base);
    CHECK(c.pipeline.seed == 5);
    CHECK(c.pipeline.learner == "rf:10:4");
    CHECK(c.pipeline.pca_audio == 250);
    CHECK(c.pipeline.pca_speaker == 256);
    CHECK(c.window == WindowConfig{});
  }

  TEST_CASE("bad documents are usage errors") {
    CHECK_THROWS_AS(run_config_from_json({{"seed", "abc"}}), UsageError);
    CHECK_THROWS_AS(run_config_from_json({{"mode", "sideways"}}), UsageError);
    emo::testing::TempDir dir("cfg");
    emo::testing::spit(dir / "broken.json", "{ not json");
    CHECK_THROWS_AS(load_run_config(dir / "broken.json"), UsageError);
    CHECK_THROWS_AS(load_run_config(dir / "missing.json"), UsageError);
  }

  TEST_CASE("resolved config reloads to the same run") {
    emo::testing::TempDir dir("cfg");
    RunConfig c;
    c.out = dir.path();
    c.pipeline.seed = 17;
    write_resolved_config(dir.path(), c);
    auto back = load_run_config(dir / "resolved-config.json");
    CHECK(to_json(back) == to_json(c));
  }

  TEST_CASE("data directory discovery") {
    emo::testing::TempDir dir("data");
    emo::testing::spit(dir / "utterances.jsonl", "");
    emo::testing::spit(dir / "audio.csv", "");
    RunConfig c;
    use_data_dir(c, dir.path());
    CHECK(c.corpus == dir / "utterances.jsonl");
    CHECK(c.audio == dir / "audio.csv");
    CHECK(c.text.empty());
    CHECK(c.speaker.empty());
  }
}
