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

#include "erfc/metrics.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "erfc/error.hpp"

namespace emo {
namespace {

void check_alignment(const std::vector<Prediction> &predictions,
                     const std::vector<TargetTruth> &truth, std::size_t n_targets) {
  if (predictions.size() != truth.size())
    throw ValidationError(ErrorKind::kDimensionMismatch,
                          fmt::format("{} predictions for {} examples", predictions.size(),
                                      truth.size()));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i].size() != n_targets || predictions[i].targets.size() != n_targets)
      throw ValidationError(ErrorKind::kDimensionMismatch,
                            fmt::format("example {} has the wrong number of targets", i));
    for (std::size_t j = 0; j < n_targets; ++j)
      if (truth[i][j] && !predictions[i].targets[j])
        throw ValidationError(ErrorKind::kDimensionMismatch,
                              fmt::format("example {} target {} has no prediction", i, j));
  }
}

}  // namespace

double display_round(double percent) {
  const double snapped = std::stod(fmt::format("{:.9f}", percent * 10.0));
  return std::round(snapped) / 10.0;
}

double future_average(const std::vector<double> &per_horizon) {
  if (per_horizon.size() <= 1) return 0.0;
  double s = 0.0;
  for (std::size_t h = 1; h < per_horizon.size(); ++h) s += per_horizon[h];
  return s / static_cast<double>(per_horizon.size() - 1);
}

double overall_average(const std::vector<double> &per_horizon) {
  double s = 0.0;
  for (double v : per_horizon) s += v;
  return per_horizon.empty() ? 0.0 : s / static_cast<double>(per_horizon.size());
}

EvalReport compute_metrics(const std::vector<Prediction> &predictions,
                           const std::vector<TargetTruth> &truth, int k, Scheme scheme) {
  if (k < 0) throw UsageError("horizon k must be >= 0");
  const std::size_t H = static_cast<std::size_t>(k + 1);
  check_alignment(predictions, truth, 2 * H);

  EvalReport r;
  r.k = k;
  r.scheme = scheme;
  std::array<std::vector<std::int64_t>, 2> hits, total;
  for (auto &v : hits) v.assign(H, 0);
  for (auto &v : total) v.assign(H, 0);
  for (std::size_t i = 0; i < truth.size(); ++i)
    for (int slot = 0; slot < 2; ++slot)
      for (std::size_t h = 0; h < H; ++h) {
        const auto j = static_cast<std::size_t>(target_index(slot, static_cast<int>(h), k));
        if (!truth[i][j]) continue;
        ++total[slot][h];
        if (predictions[i].targets[j]->label == *truth[i][j]) ++hits[slot][h];
      }

  for (std::size_t h = 0; h < H; ++h) {
    const auto n = total[0][h] + total[1][h];
    if (n == 0)
      throw ValidationError(ErrorKind::kEmptyInput,
                            fmt::format("horizon {} has no unmasked targets", h));
    r.n_per_horizon.push_back(n);
    r.acc_per_horizon.push_back(100.0 * static_cast<double>(hits[0][h] + hits[1][h]) /
                                static_cast<double>(n));
    for (int slot = 0; slot < 2; ++slot)
      r.acc_per_speaker[slot].push_back(
          total[slot][h] ? std::optional<double>(100.0 * static_cast<double>(hits[slot][h]) /
                                                 static_cast<double>(total[slot][h]))
                         : std::nullopt);
    r.n_predictions += n;
  }
  r.acc_current = r.acc_per_horizon[0];
  r.acc_future_avg = future_average(r.acc_per_horizon);
  r.acc_overall = overall_average(r.acc_per_horizon);
  r.confusion = confusion_matrix(predictions, truth, scheme);
  return r;
}

ConfusionMatrix confusion_matrix(const std::vector<Prediction> &predictions,
                                 const std::vector<TargetTruth> &truth, Scheme scheme) {
  const auto C = static_cast<std::size_t>(class_count(scheme));
  ConfusionMatrix m(C, std::vector<std::int64_t>(C, 0));
  if (predictions.size() != truth.size())
    throw ValidationError(ErrorKind::kDimensionMismatch,
                          fmt::format("{} predictions for {} examples", predictions.size(),
                                      truth.size()));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (std::size_t j = 0; j < truth[i].size(); ++j) {
      if (!truth[i][j]) continue;
      if (j >= predictions[i].targets.size() || !predictions[i].targets[j])
        throw ValidationError(ErrorKind::kDimensionMismatch,
                              fmt::format("example {} target {} has no prediction", i, j));
      const auto t = static_cast<std::size_t>(*truth[i][j]);
      const auto p = static_cast<std::size_t>(predictions[i].targets[j]->label);
      if (t >= C || p >= C)
        throw ValidationError(ErrorKind::kDimensionMismatch,
                              fmt::format("class code out of range in example {}", i));
      ++m[t][p];
    }
  }
  return m;
}

nlohmann::json report_to_json(const EvalReport &r) {
  nlohmann::json j;
  j["k"] = r.k;
  j["scheme"] = scheme_name(r.scheme);
  j["class_order"] = class_names(r.scheme);
  j["acc_per_horizon"] = r.acc_per_horizon;
  auto speakers = nlohmann::json::array();
  for (const auto &slot : r.acc_per_speaker) {
    auto arr = nlohmann::json::array();
    for (const auto &v : slot) arr.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
    speakers.push_back(arr);
  }
  j["acc_per_speaker"] = speakers;
  j["n_per_horizon"] = r.n_per_horizon;
  j["acc_current"] = r.acc_current;
  j["acc_future_avg"] = r.acc_future_avg;
  j["acc_overall"] = r.acc_overall;
  j["acc_validation"] = r.acc_validation ? nlohmann::json(*r.acc_validation) : nlohmann::json(nullptr);
  nlohmann::json display;
  display["current"] = display_round(r.acc_current);
  display["future_avg"] = display_round(r.acc_future_avg);
  display["overall"] = display_round(r.acc_overall);
  if (r.acc_validation) display["validation"] = display_round(*r.acc_validation);
  auto per_h = nlohmann::json::array();
  for (double v : r.acc_per_horizon) per_h.push_back(display_round(v));
  display["per_horizon"] = per_h;
  j["display"] = display;
  j["confusion"] = r.confusion;
  j["n_predictions"] = r.n_predictions;
  return j;
}

void write_confusion_csv(std::ostream &out, const ConfusionMatrix &m, Scheme scheme,
                         const std::string &spec_id) {
  const auto names = class_names(scheme);
  out << (spec_id.empty() ? "" : "spec,") << "true,pred,count\n";
  for (std::size_t t = 0; t < m.size(); ++t)
    for (std::size_t p = 0; p < m[t].size(); ++p) {
      if (!spec_id.empty()) out << spec_id << ',';
      out << names[t] << ',' << names[p] << ',' << m[t][p] << '\n';
    }
}

}  // namespace emo
