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
#include "erfc/experiment.hpp"
#include "erfc/synth.hpp"
#include "test_support.hpp"

using namespace emo;

namespace {

SynthConfig small_cfg(const std::string &preset, std::uint64_t seed) {
  auto c = synth_preset(preset, seed);
  c.n_conversations = 15;
  c.t_mean = 5;
  c.dims = {6, 8, 6};
  return c;
}

// Largest |P(next partner label = b | own label = a) - P(b)| over all cells.
double max_cross_dependence(const std::vector<std::array<int, 2>> &chain, int C) {
  std::vector<std::vector<double>> joint(static_cast<std::size_t>(C), std::vector<double>(static_cast<std::size_t>(C), 0.0));
  std::vector<double> row(static_cast<std::size_t>(C), 0.0), col(static_cast<std::size_t>(C), 0.0);
  for (std::size_t t = 0; t + 1 < chain.size(); ++t) {
    const auto a = static_cast<std::size_t>(chain[t][0]);
    const auto b = static_cast<std::size_t>(chain[t + 1][1]);
    joint[a][b] += 1;
    row[a] += 1;
    col[b] += 1;
  }
  const double n = static_cast<double>(chain.size() - 1);
  double worst = 0.0;
  for (std::size_t a = 0; a < joint.size(); ++a)
    for (std::size_t b = 0; b < joint.size(); ++b)
      if (row[a] > 0) worst = std::max(worst, std::abs(joint[a][b] / row[a] - col[b] / n));
  return worst;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("same config writes byte-identical files") {
    const auto cfg = small_cfg("default", 4);
    emo::testing::TempDir a("synth-a"), b("synth-b");
    write_synth(a.path(), generate(cfg));
    write_synth(b.path(), generate(cfg));
    for (const char *f : {"utterances.jsonl", "text.csv", "audio.csv", "speaker.csv", "truth.json"}) {
      CAPTURE(f);
      REQUIRE(std::filesystem::exists(a / f));
      CHECK(emo::testing::slurp(a / f) == emo::testing::slurp(b / f));
    }
    emo::testing::TempDir c("synth-c");
    write_synth(c.path(), generate(small_cfg("default", 5)));
    CHECK(emo::testing::slurp(a / "text.csv") != emo::testing::slurp(c / "text.csv"));
  }

  TEST_CASE("written files pass ingestion and match the truth") {
    const auto cfg = small_cfg("merge", 2);
    const auto corpus = generate(cfg);
    emo::testing::TempDir dir("synth");
    write_synth(dir.path(), corpus);
    const auto data = load_corpus(dir / "utterances.jsonl", dir / "text.csv", dir / "audio.csv",
                                  dir / "speaker.csv");
    REQUIRE(data.conversations.size() == 15);
    CHECK(data.text.size() == corpus.text.size());
    CHECK(data.audio.dim() == 8);
    const auto scheme = cfg.label_scheme();
    for (const auto &conv : data.conversations) {
      CHECK(session_of(conv.conv_id) >= 1);
      CHECK(session_of(conv.conv_id) <= 5);
      const auto &truth = corpus.truth.labels.at(conv.conv_id);
      REQUIRE(truth.size() == conv.turns.size());
      for (std::size_t t = 0; t < truth.size(); ++t)
        for (int s = 0; s < 2; ++s) {
          const auto &side = conv.turns[t].sides[s];
          CHECK(side.present == (truth[t][s] >= 0));
          if (side.present) {
            CHECK(encode_for(*side.label, scheme) == truth[t][s]);
            CHECK(side.avd.has_value());
          }
        }
    }
    auto j = nlohmann::json::parse(emo::testing::slurp(dir / "truth.json"));
    CHECK(j["format"] == "erfc-synth-truth/1");
    CHECK(synth_config_from_json(j["config"]).seed == 2);
  }

  TEST_CASE("sessions are contiguous blocks") {
    auto cfg = small_cfg("default", 1);
    cfg.n_conversations = 10;
    auto corpus = generate(cfg);
    std::map<int, int> per;
    for (const auto &c : corpus.conversations) ++per[session_of(c.conv_id)];
    CHECK(per == std::map<int, int>{{1, 2}, {2, 2}, {3, 2}, {4, 2}, {5, 2}});
  }

  TEST_CASE("without influence the partner label carries no signal") {
    auto cfg = synth_preset("influence", 0);
    cfg.alpha = 0.0;
    cfg.p_self = synth_preset("default").p_self;
    const auto chain = simulate_chain(cfg, 100000, 3);
    CHECK(max_cross_dependence(chain, 6) < 0.02);
    const auto influenced = simulate_chain(synth_preset("influence", 0), 100000, 3);
    CHECK(max_cross_dependence(influenced, 6) > 0.3);
  }

  TEST_CASE("stationary distribution is a fixed point and matches long runs") {
    for (const auto &name : synth_preset_names()) {
      CAPTURE(name);
      const auto cfg = synth_preset(name, 0);
      const auto M = joint_transition(cfg);
      CHECK((M.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
      const auto pi = joint_stationary(cfg);
      CHECK(pi.sum() == doctest::Approx(1.0));
      CHECK((M.transpose() * pi - pi).lpNorm<1>() < 1e-10);
    }
    const auto cfg = synth_preset("default", 0);
    const auto pi = joint_stationary(cfg);
    const auto chain = simulate_chain(cfg, 200000, 9);
    Eigen::VectorXd freq = Eigen::VectorXd::Zero(36);
    for (const auto &s : chain) freq[s[0] * 6 + s[1]] += 1.0;
    freq /= static_cast<double>(chain.size());
    CHECK((freq - pi).cwiseAbs().maxCoeff() < 0.01);
  }

  TEST_CASE("emission centres are equidistant at the separation") {
    auto cfg = synth_preset("default", 6);
    cfg.separation = 3.5;
    const auto c = emission_centres(cfg);
    for (const Eigen::MatrixXd *m : {&c.text, &c.audio, &c.speaker}) {
      REQUIRE(m->rows() == 6);
      for (int a = 0; a < 6; ++a)
        for (int b = a + 1; b < 6; ++b)
          CHECK((m->row(a) - m->row(b)).norm() == doctest::Approx(3.5).epsilon(1e-10));
    }
    auto merge = synth_preset("merge", 6);
    CHECK(merge.n_groups() == 4);
    CHECK(emission_centres(merge).text.rows() == 4);
  }

  TEST_CASE("zero separation makes features uninformative") {
    auto cfg = small_cfg("default", 8);
    cfg.separation = 0.0;
    cfg.n_conversations = 60;
    const auto c = emission_centres(cfg);
    CHECK(c.text.norm() == 0.0);
    const auto corpus = generate(cfg);
    std::vector<Eigen::VectorXd> sum(6, Eigen::VectorXd::Zero(6));
    std::vector<int> count(6, 0);
    for (const auto &[conv, turns] : corpus.truth.labels)
      for (std::size_t t = 0; t < turns.size(); ++t)
        for (int s = 0; s < 2; ++s) {
          if (turns[t][s] < 0) continue;
          auto v = *corpus.text.find({conv, static_cast<int>(t), s});
          sum[static_cast<std::size_t>(turns[t][s])] += Eigen::Map<const Eigen::VectorXd>(v.data(), 6);
          ++count[static_cast<std::size_t>(turns[t][s])];
        }
    for (int k = 0; k < 6; ++k) {
      REQUIRE(count[static_cast<std::size_t>(k)] > 30);
      const double se = 1.0 / std::sqrt(count[static_cast<std::size_t>(k)]);
      CHECK((sum[static_cast<std::size_t>(k)] / count[static_cast<std::size_t>(k)]).cwiseAbs().maxCoeff() < 5 * se);
    }
  }

  TEST_CASE("emit_avd=false and trailing sides") {
    auto cfg = small_cfg("default", 3);
    cfg.emit_avd = false;
    cfg.trailing_prob = 1.0;
    const auto corpus = generate(cfg);
    for (const auto &c : corpus.conversations)
      for (const auto &u : c.utterances) CHECK_FALSE(u.avd.has_value());
    for (const auto &[conv, turns] : corpus.truth.labels) CHECK(turns.back()[1] == -1);
  }

  TEST_CASE("config validation and overrides") {
    for (const auto &name : synth_preset_names()) CHECK_NOTHROW(synth_preset(name, 1));
    CHECK_THROWS_AS(synth_preset("bogus"), UsageError);
    auto c = synth_preset("default");
    c.p_self[0][0] += 0.1;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c = synth_preset("default");
    c.alpha = 1.5;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c = synth_preset("default");
    c.dims.text = 3;
    CHECK_THROWS_AS(c.validate(), UsageError);
    auto four = synth_config_from_json({{"n_classes", 4}, {"n_conversations", 7}});
    CHECK(four.label_scheme() == Scheme::kFour);
    CHECK(four.n_conversations == 7);
    CHECK(four.avd_means.size() == 4);
    auto round = synth_config_from_json(to_json(synth_preset("avd", 12)));
    CHECK(to_json(round) == to_json(synth_preset("avd", 12)));
    CHECK_THROWS_AS(synth_config_from_json({{"alpha", "high"}}), UsageError);
  }

  TEST_CASE("four-class corpora use the merged label set") {
    auto cfg = synth_config_from_json({{"n_classes", 4}, {"n_conversations", 6}, {"seed", 1}});
    const auto corpus = generate(cfg);
    for (const auto &c : corpus.conversations)
      for (const auto &u : c.utterances) CHECK(valid_in(u.emotion, Scheme::kFour));
  }
}
