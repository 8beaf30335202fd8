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
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "erfc/emotion.hpp"
#include "erfc/stacking.hpp"

namespace emo {

using TargetTruth = std::vector<std::optional<int>>;
using ConfusionMatrix = std::vector<std::vector<std::int64_t>>;

// Accuracies are percentages. Per-horizon values pool both speakers over the
// unmasked targets of that horizon.
struct EvalReport {
  int k = 0;
  Scheme scheme = Scheme::kSix;
  std::vector<double> acc_per_horizon;
  std::array<std::vector<std::optional<double>>, 2> acc_per_speaker;
  std::vector<std::int64_t> n_per_horizon;
  double acc_current = 0.0;
  double acc_future_avg = 0.0;
  double acc_overall = 0.0;
  std::optional<double> acc_validation;
  ConfusionMatrix confusion;
  std::int64_t n_predictions = 0;
};

// Half away from zero to one decimal. The value is first snapped to nine
// decimals so 58.55 computed as 58.549999... still shows as 58.6.
double display_round(double percent);

// Mean over horizons 1..k (0 when k = 0) and over 0..k.
double future_average(const std::vector<double> &per_horizon);
double overall_average(const std::vector<double> &per_horizon);

// Throws kEmptyInput when some horizon has no unmasked target and
// kDimensionMismatch when predictions and truth do not line up.
EvalReport compute_metrics(const std::vector<Prediction> &predictions,
                           const std::vector<TargetTruth> &truth, int k, Scheme scheme);

// Rows are true classes, columns predictions; masked targets are skipped.
ConfusionMatrix confusion_matrix(const std::vector<Prediction> &predictions,
                                 const std::vector<TargetTruth> &truth, Scheme scheme);

nlohmann::json report_to_json(const EvalReport &report);

// Long format: true,pred,count with class names.
void write_confusion_csv(std::ostream &out, const ConfusionMatrix &m, Scheme scheme,
                         const std::string &spec_id = "");

}  // namespace emo
