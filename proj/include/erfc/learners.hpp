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

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace emo {

// Contract every base learner of the stacked forecaster satisfies:
//  * predict_proba rows are non-negative and sum to 1 (within 1e-9);
//  * fit is a pure function of (X, y, n_classes, seed).
class BaseLearner {
 public:
  virtual ~BaseLearner() = default;

  // Labels are in [0, n_classes).
  virtual void fit(const Eigen::MatrixXd &X, std::span<const int> y, int n_classes,
                   std::uint64_t seed) = 0;
  // Writes n_classes probabilities for one input row.
  virtual void predict_row(std::span<const double> x, std::span<double> out) const = 0;
  virtual std::string id() const = 0;
  virtual nlohmann::json to_json() const = 0;

  int n_classes() const { return n_classes_; }
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd &X) const;

 protected:
  int n_classes_ = 0;
};

// Predicts the class frequencies of its training labels everywhere; uniform
// when trained on nothing. Stands in for heads whose target column is
// degenerate.
class ConstantLearner final : public BaseLearner {
 public:
  void fit(const Eigen::MatrixXd &X, std::span<const int> y, int n_classes,
           std::uint64_t seed) override;
  void predict_row(std::span<const double> x, std::span<double> out) const override;
  std::string id() const override { return "constant"; }
  nlohmann::json to_json() const override;
  static std::unique_ptr<ConstantLearner> from_json(const nlohmann::json &j);

  const std::vector<double> &probabilities() const { return probs_; }

 private:
  std::vector<double> probs_;
};

// Multinomial logistic regression on standardized inputs with an L2 penalty
// (bias excluded), minimized with L-BFGS. Deterministic; the seed is unused.
class LogisticRegression final : public BaseLearner {
 public:
  explicit LogisticRegression(double l2 = 1.0, int max_iter = 200)
      : l2_(l2), max_iter_(max_iter) {}

  void fit(const Eigen::MatrixXd &X, std::span<const int> y, int n_classes,
           std::uint64_t seed) override;
  void predict_row(std::span<const double> x, std::span<double> out) const override;
  std::string id() const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<LogisticRegression> from_json(const nlohmann::json &j);

 private:
  double l2_;
  int max_iter_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd scale_;
  Eigen::MatrixXd weights_;  // (p + 1) x C, last row is the bias
};

// Multi-class AdaBoost (SAMME) over depth-1 trees on quantile-binned inputs.
class StumpBoost final : public BaseLearner {
 public:
  explicit StumpBoost(int rounds = 50) : rounds_(rounds) {}

  void fit(const Eigen::MatrixXd &X, std::span<const int> y, int n_classes,
           std::uint64_t seed) override;
  void predict_row(std::span<const double> x, std::span<double> out) const override;
  std::string id() const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<StumpBoost> from_json(const nlohmann::json &j);

  std::size_t n_stumps() const { return stumps_.size(); }

 private:
  struct Stump {
    int feature = 0;
    double threshold = 0.0;
    int left = 0;
    int right = 0;
    double alpha = 0.0;
  };
  int rounds_;
  std::vector<Stump> stumps_;
};

// Parses "rf:<n_trees>:<max_depth>", "logreg:<l2>" or "stump-boost:<rounds>"
// ("rf", "logreg" and "stump-boost" alone pick the defaults). Throws
// UsageError listing the valid forms otherwise.
std::unique_ptr<BaseLearner> default_learner(std::string_view spec = "rf:100:12");

// Normalized spec string, e.g. "rf" -> "rf:100:12".
std::string canonical_learner_spec(std::string_view spec);

std::unique_ptr<BaseLearner> learner_from_json(const nlohmann::json &j);

}  // namespace emo
