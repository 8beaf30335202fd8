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

#include <sstream>

#include "erfc/error.hpp"
#include "erfc/metrics.hpp"
#include "erfc/seeding.hpp"

using namespace emo;

namespace {

Prediction pred(const std::vector<int> &labels, int C) {
  Prediction p;
  for (int l : labels) {
    TargetPrediction t;
    t.probs.assign(static_cast<std::size_t>(C), 0.0);
    t.probs[static_cast<std::size_t>(l)] = 1.0;
    t.label = l;
    p.targets.push_back(t);
  }
  return p;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("hand-computed report") {
    // k = 1: targets ordered (slot0 h0, slot0 h1, slot1 h0, slot1 h1).
    std::vector<Prediction> preds{pred({0, 1, 2, 3}, 6), pred({0, 0, 0, 0}, 6)};
    std::vector<TargetTruth> truth{{0, 1, 5, std::nullopt}, {0, 2, std::nullopt, std::nullopt}};
    auto r = compute_metrics(preds, truth, 1, Scheme::kSix);
    // h0: slot0 2/2, slot1 0/1 -> 2/3. h1: slot0 1/2 -> 1/2.
    CHECK(r.n_per_horizon == std::vector<std::int64_t>{3, 2});
    CHECK(r.acc_per_horizon[0] == doctest::Approx(200.0 / 3.0));
    CHECK(r.acc_per_horizon[1] == doctest::Approx(50.0));
    CHECK(r.acc_per_speaker[0][0] == doctest::Approx(100.0));
    CHECK(r.acc_per_speaker[1][0] == doctest::Approx(0.0));
    CHECK_FALSE(r.acc_per_speaker[1][1].has_value());
    CHECK(r.acc_current == r.acc_per_horizon[0]);
    CHECK(r.acc_future_avg == doctest::Approx(50.0));
    CHECK(r.acc_overall == doctest::Approx((200.0 / 3.0 + 50.0) / 2.0));
    CHECK(r.n_predictions == 5);
    CHECK(r.confusion[0][0] == 2);
    CHECK(r.confusion[1][1] == 1);
    CHECK(r.confusion[5][2] == 1);
    CHECK(r.confusion[2][0] == 1);
  }

  TEST_CASE("overall equals the weighted current/future identity") {
    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
      const int k = 1 + static_cast<int>(rng() % 5);
      std::vector<double> h(static_cast<std::size_t>(k + 1));
      for (auto &v : h) v = std::uniform_real_distribution<double>(0, 100)(rng);
      const double overall = overall_average(h);
      CHECK(std::abs(overall - (h[0] + k * future_average(h)) / (k + 1)) < 1e-12);
    }
    CHECK(future_average({70.0}) == 0.0);
    CHECK(overall_average({70.0}) == 70.0);
  }

  TEST_CASE("display rounding is half away from zero at one decimal") {
    CHECK(display_round((73.2 + 3 * 61.2) / 4) == 64.2);
    CHECK(display_round((63.2 + 3 * 57.0) / 4) == 58.6);
    CHECK(display_round(58.55) == 58.6);
    CHECK(display_round(58.549) == 58.5);
    CHECK(display_round(0.05) == 0.1);
    CHECK(display_round(100.0) == 100.0);
  }

  TEST_CASE("confusion rows sum to the true-class counts") {
    Rng rng(4);
    std::vector<Prediction> preds;
    std::vector<TargetTruth> truth;
    std::vector<std::int64_t> counts(4, 0);
    for (int i = 0; i < 300; ++i) {
      std::vector<int> labels;
      TargetTruth t;
      for (int j = 0; j < 6; ++j) {
        labels.push_back(static_cast<int>(rng() % 4));
        if (rng() % 3 == 0) {
          t.push_back(std::nullopt);
        } else {
          t.push_back(static_cast<int>(rng() % 4));
          ++counts[static_cast<std::size_t>(*t.back())];
        }
      }
      preds.push_back(pred(labels, 4));
      truth.push_back(t);
    }
    auto m = confusion_matrix(preds, truth, Scheme::kFour);
    std::int64_t total = 0;
    for (std::size_t c = 0; c < 4; ++c) {
      std::int64_t row = 0;
      for (auto v : m[c]) row += v;
      CHECK(row == counts[c]);
      total += row;
    }
    CHECK(total == compute_metrics(preds, truth, 2, Scheme::kFour).n_predictions);
  }

  TEST_CASE("misaligned or empty input is rejected") {
    std::vector<Prediction> preds{pred({0, 0}, 6)};
    CHECK_THROWS_AS(compute_metrics(preds, {}, 0, Scheme::kSix), ValidationError);
    CHECK_THROWS_AS(compute_metrics(preds, {{0, 0, 0, 0}}, 1, Scheme::kSix), ValidationError);
    try {
      compute_metrics(preds, {{std::nullopt, std::nullopt}}, 0, Scheme::kSix);
      FAIL("expected empty-input");
    } catch (const ValidationError &e) {
      CHECK(e.kind() == ErrorKind::kEmptyInput);
    }
    Prediction hole = pred({0, 0}, 6);
    hole.targets[1].reset();
    CHECK_THROWS_AS(compute_metrics({hole}, {{0, 1}}, 0, Scheme::kSix), ValidationError);
  }

  TEST_CASE("report JSON and confusion CSV") {
    std::vector<Prediction> preds{pred({0, 1}, 4)};
    auto r = compute_metrics(preds, {{0, 2}}, 0, Scheme::kFour);
    r.acc_validation = 12.34;
    auto j = report_to_json(r);
    CHECK(j["display"]["current"] == 50.0);
    CHECK(j["display"]["validation"] == 12.3);
    CHECK(j["class_order"] == nlohmann::json({"Happy", "Sad", "Neutral", "Angry"}));
    CHECK(j["n_predictions"] == 2);
    std::stringstream csv;
    write_confusion_csv(csv, r.confusion, Scheme::kFour, "E3");
    const auto s = csv.str();
    CHECK(s.rfind("spec,true,pred,count\n", 0) == 0);
    CHECK(s.find("E3,Neutral,Sad,1\n") != std::string::npos);
    CHECK(std::count(s.begin(), s.end(), '\n') == 17);
  }
}
