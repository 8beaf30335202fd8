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

#include "erfc/oracle.hpp"
#include "erfc/synth.hpp"

using namespace emo;

namespace {

Matrix diag_rows(int C, double d) {
  Matrix m(static_cast<std::size_t>(C), std::vector<double>(static_cast<std::size_t>(C), (1.0 - d) / (C - 1)));
  for (int i = 0; i < C; ++i) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = d;
  return m;
}

SynthConfig four_class(double self_diag) {
  auto c = synth_config_from_json({{"n_classes", 4}});
  c.alpha = 0.0;
  c.p_self = diag_rows(4, self_diag);
  c.p_cross = diag_rows(4, 0.25);
  c.validate();
  return c;
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("sticky independent chains") {
    const auto cfg = four_class(0.9);
    auto r = oracle_by_horizon(cfg, 3, Conditioning::kCurrentLabelsOnly);
    REQUIRE(r.size() == 4);
    for (const auto &x : r) CHECK(x.exact);
    CHECK(r[0].accuracy == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r[1].accuracy == doctest::Approx(0.9).epsilon(1e-12));
    const double off = 0.1 / 3.0;
    CHECK(r[2].accuracy == doctest::Approx(0.81 + 3 * off * off).epsilon(1e-12));
    CHECK(bayes_oracle(cfg, 2, Conditioning::kCurrentLabelsOnly).accuracy == r[2].accuracy);
  }

  TEST_CASE("uniform transitions are unpredictable beyond the current turn") {
    for (int C : {4, 6}) {
      auto cfg = synth_config_from_json({{"n_classes", C}});
      cfg.p_self = diag_rows(C, 1.0 / C);
      cfg.p_cross = diag_rows(C, 1.0 / C);
      auto r = oracle_by_horizon(cfg, 3, Conditioning::kCurrentLabelsOnly);
      for (int h = 1; h <= 3; ++h) CHECK(r[static_cast<std::size_t>(h)].accuracy == doctest::Approx(1.0 / C).epsilon(1e-12));
    }
  }

  TEST_CASE("features decide the current turn when centres are far apart") {
    auto r = bayes_oracle(synth_preset("separable", 0), 0, Conditioning::kCurrentFeaturesOnly, 20000, 1);
    CHECK_FALSE(r.exact);
    CHECK(r.accuracy > 0.999);
    auto full = bayes_oracle(synth_preset("separable", 0), 0, Conditioning::kFullHistory, 20000, 1);
    CHECK(full.accuracy > 0.999);
  }

  TEST_CASE("zero separation falls back to the prior") {
    auto cfg = synth_preset("default", 0);
    cfg.separation = 0.0;
    auto r = bayes_oracle(cfg, 0, Conditioning::kCurrentFeaturesOnly, 2000, 3);
    CHECK(r.accuracy == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
    CHECK(r.std_error < 1e-9);
  }

  TEST_CASE("less information never beats the current labels") {
    const auto cfg = synth_preset("default", 0);
    const auto exact = oracle_by_horizon(cfg, 3, Conditioning::kCurrentLabelsOnly);
    const auto full = oracle_by_horizon(cfg, 3, Conditioning::kFullHistory, 20000, 5);
    const auto feat = oracle_by_horizon(cfg, 3, Conditioning::kCurrentFeaturesOnly, 20000, 5);
    for (std::size_t h = 0; h < 4; ++h) {
      CHECK(full[h].accuracy <= exact[h].accuracy + 4 * full[h].std_error + 1e-12);
      CHECK(feat[h].accuracy <= full[h].accuracy + 4 * (full[h].std_error + feat[h].std_error));
      if (h > 0) CHECK(full[h].accuracy <= full[h - 1].accuracy + 1e-9);
    }
  }

  TEST_CASE("Monte Carlo estimates are seeded") {
    const auto cfg = synth_preset("influence", 0);
    auto a = bayes_oracle(cfg, 1, Conditioning::kFullHistory, 3000, 8);
    auto b = bayes_oracle(cfg, 1, Conditioning::kFullHistory, 3000, 8);
    CHECK(a.accuracy == b.accuracy);
    CHECK(a.std_error == b.std_error);
  }
}
