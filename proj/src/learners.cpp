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

#include "erfc/learners.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <limits>

#include <fmt/format.h>

#include "erfc/error.hpp"
#include "erfc/forest.hpp"

namespace emo {
namespace {

constexpr const char *kValidSpecs =
    "valid learner specs: rf:<n_trees>:<max_depth>, logreg:<l2>, stump-boost:<rounds>";

std::vector<std::string_view> split_colon(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(':', start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
T parse_spec_number(std::string_view s, std::string_view spec) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw UsageError(fmt::format("bad number \"{}\" in learner spec \"{}\"; {}", s, spec,
                                 kValidSpecs));
  return v;
}

void softmax_inplace(std::span<double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double &x : v) {
    x = std::exp(x - m);
    sum += x;
  }
  for (double &x : v) x /= sum;
}

}  // namespace

Eigen::MatrixXd BaseLearner::predict_proba(const Eigen::MatrixXd &X) const {
  Eigen::MatrixXd out(X.rows(), n_classes_);
  std::vector<double> row(static_cast<std::size_t>(X.cols()));
  std::vector<double> probs(static_cast<std::size_t>(n_classes_));
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    for (Eigen::Index c = 0; c < X.cols(); ++c) row[static_cast<std::size_t>(c)] = X(r, c);
    predict_row(row, probs);
    for (int c = 0; c < n_classes_; ++c) out(r, c) = probs[static_cast<std::size_t>(c)];
  }
  return out;
}

// --- constant ---------------------------------------------------------------

void ConstantLearner::fit(const Eigen::MatrixXd &, std::span<const int> y, int n_classes,
                          std::uint64_t) {
  n_classes_ = n_classes;
  probs_.assign(static_cast<std::size_t>(n_classes), 0.0);
  if (y.empty()) {
    std::fill(probs_.begin(), probs_.end(), 1.0 / n_classes);
    return;
  }
  for (int label : y) probs_[static_cast<std::size_t>(label)] += 1.0;
  for (double &p : probs_) p /= static_cast<double>(y.size());
}

void ConstantLearner::predict_row(std::span<const double>, std::span<double> out) const {
  std::copy(probs_.begin(), probs_.end(), out.begin());
}

nlohmann::json ConstantLearner::to_json() const {
  return {{"type", "constant"}, {"n_classes", n_classes_}, {"probs", probs_}};
}

std::unique_ptr<ConstantLearner> ConstantLearner::from_json(const nlohmann::json &j) {
  auto c = std::make_unique<ConstantLearner>();
  c->n_classes_ = j.at("n_classes").get<int>();
  c->probs_ = j.at("probs").get<std::vector<double>>();
  return c;
}

// --- logistic regression ----------------------------------------------------

void LogisticRegression::fit(const Eigen::MatrixXd &X, std::span<const int> y, int n_classes,
                             std::uint64_t) {
  n_classes_ = n_classes;
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const Eigen::Index C = n_classes;
  mean_ = n > 0 ? Eigen::VectorXd(X.colwise().mean().transpose()) : Eigen::VectorXd::Zero(p);
  scale_ = Eigen::VectorXd::Ones(p);
  if (n > 1) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const double sd = std::sqrt((X.col(j).array() - mean_[j]).square().sum() / (n - 1));
      if (sd > 1e-12) scale_[j] = sd;
    }
  }
  Eigen::MatrixXd A(n, p + 1);
  A.leftCols(p) = (X.rowwise() - mean_.transpose()).array().rowwise() / scale_.transpose().array();
  A.col(p).setOnes();
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, C);
  for (Eigen::Index i = 0; i < n; ++i) Y(i, y[static_cast<std::size_t>(i)]) = 1.0;

  auto objective = [&](const Eigen::MatrixXd &W, Eigen::MatrixXd &G) {
    Eigen::MatrixXd Z = A * W;
    double f = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = Z.row(i).maxCoeff();
      Eigen::RowVectorXd e = (Z.row(i).array() - m).exp();
      const double s = e.sum();
      f += m + std::log(s) - Z.row(i).dot(Y.row(i));
      Z.row(i) = e / s;
    }
    G = A.transpose() * (Z - Y);
    Eigen::MatrixXd reg = W;
    reg.row(p).setZero();
    G += l2_ * reg;
    f += 0.5 * l2_ * reg.squaredNorm();
    return f;
  };

  // L-BFGS with Armijo backtracking.
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(p + 1, C);
  Eigen::MatrixXd G(p + 1, C), G_new(p + 1, C);
  double f = objective(W, G);
  std::deque<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> history;
  constexpr std::size_t kMemory = 10;
  for (int iter = 0; iter < max_iter_ && n > 0; ++iter) {
    if (G.cwiseAbs().maxCoeff() < 1e-6) break;
    Eigen::MatrixXd q = G;
    std::vector<double> alphas(history.size());
    for (std::size_t i = history.size(); i-- > 0;) {
      const auto &[s, yv] = history[i];
      alphas[i] = (s.cwiseProduct(q)).sum() / (yv.cwiseProduct(s)).sum();
      q -= alphas[i] * yv;
    }
    if (!history.empty()) {
      const auto &[s, yv] = history.back();
      q *= (s.cwiseProduct(yv)).sum() / yv.squaredNorm();
    } else {
      q /= std::max(1.0, G.norm());
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
      const auto &[s, yv] = history[i];
      const double beta = (yv.cwiseProduct(q)).sum() / (yv.cwiseProduct(s)).sum();
      q += (alphas[i] - beta) * s;
    }
    Eigen::MatrixXd dir = -q;
    double slope = (G.cwiseProduct(dir)).sum();
    if (slope >= 0.0) {
      dir = -G / std::max(1.0, G.norm());
      slope = (G.cwiseProduct(dir)).sum();
      history.clear();
    }
    double step = 1.0;
    double f_new = f;
    Eigen::MatrixXd W_new;
    int tries = 0;
    for (; tries < 50; ++tries) {
      W_new = W + step * dir;
      f_new = objective(W_new, G_new);
      if (f_new <= f + 1e-4 * step * slope) break;
      step *= 0.5;
    }
    if (tries == 50) break;
    Eigen::MatrixXd s = W_new - W;
    Eigen::MatrixXd yv = G_new - G;
    if ((s.cwiseProduct(yv)).sum() > 1e-12) {
      history.emplace_back(std::move(s), std::move(yv));
      if (history.size() > kMemory) history.pop_front();
    }
    const double f_old = f;
    W = std::move(W_new);
    G = G_new;
    f = f_new;
    if (std::abs(f_old - f) <= 1e-10 * std::max(1.0, std::abs(f))) break;
  }
  weights_ = std::move(W);
}

void LogisticRegression::predict_row(std::span<const double> x, std::span<double> out) const {
  const Eigen::Index p = mean_.size();
  for (int c = 0; c < n_classes_; ++c) {
    double z = weights_(p, c);
    for (Eigen::Index j = 0; j < p; ++j)
      z += weights_(j, c) * (x[static_cast<std::size_t>(j)] - mean_[j]) / scale_[j];
    out[static_cast<std::size_t>(c)] = z;
  }
  softmax_inplace(out);
}

std::string LogisticRegression::id() const { return fmt::format("logreg:{}", l2_); }

nlohmann::json LogisticRegression::to_json() const {
  std::vector<double> w(weights_.data(), weights_.data() + weights_.size());
  return {{"type", "logreg"},
          {"l2", l2_},
          {"max_iter", max_iter_},
          {"n_classes", n_classes_},
          {"mean", std::vector<double>(mean_.data(), mean_.data() + mean_.size())},
          {"scale", std::vector<double>(scale_.data(), scale_.data() + scale_.size())},
          {"weights", w}};
}

std::unique_ptr<LogisticRegression> LogisticRegression::from_json(const nlohmann::json &j) {
  auto lr = std::make_unique<LogisticRegression>(j.at("l2").get<double>(),
                                                 j.at("max_iter").get<int>());
  lr->n_classes_ = j.at("n_classes").get<int>();
  auto mean = j.at("mean").get<std::vector<double>>();
  auto scale = j.at("scale").get<std::vector<double>>();
  auto w = j.at("weights").get<std::vector<double>>();
  const auto p = static_cast<Eigen::Index>(mean.size());
  if (scale.size() != mean.size() ||
      w.size() != static_cast<std::size_t>((p + 1) * lr->n_classes_))
    throw ValidationError(ErrorKind::kBadModel, "logistic regression shape mismatch");
  lr->mean_ = Eigen::Map<Eigen::VectorXd>(mean.data(), p);
  lr->scale_ = Eigen::Map<Eigen::VectorXd>(scale.data(), p);
  lr->weights_ = Eigen::Map<Eigen::MatrixXd>(w.data(), p + 1, lr->n_classes_);
  return lr;
}

// --- boosted stumps -----------------------------------------------------------

void StumpBoost::fit(const Eigen::MatrixXd &X, std::span<const int> y, int n_classes,
                     std::uint64_t) {
  n_classes_ = n_classes;
  stumps_.clear();
  const int n = static_cast<int>(X.rows());
  if (n == 0 || X.cols() == 0) return;
  const BinnedMatrix bins(X);
  const std::size_t C = static_cast<std::size_t>(n_classes);
  std::vector<double> w(static_cast<std::size_t>(n), 1.0 / n);
  std::vector<double> hist, left(C), total(C);

  for (int round = 0; round < rounds_; ++round) {
    std::fill(total.begin(), total.end(), 0.0);
    for (int i = 0; i < n; ++i) total[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])] += w[static_cast<std::size_t>(i)];
    double best_err = std::numeric_limits<double>::infinity();
    Stump best;
    for (int f = 0; f < bins.cols(); ++f) {
      const int nb = bins.n_bins(f);
      if (nb < 2) continue;
      hist.assign(static_cast<std::size_t>(nb) * C, 0.0);
      const std::uint8_t *col = bins.column(f);
      for (int i = 0; i < n; ++i)
        hist[static_cast<std::size_t>(col[i]) * C + static_cast<std::size_t>(y[static_cast<std::size_t>(i)])] +=
            w[static_cast<std::size_t>(i)];
      std::fill(left.begin(), left.end(), 0.0);
      for (int b = 0; b + 1 < nb; ++b) {
        for (std::size_t c = 0; c < C; ++c) left[c] += hist[static_cast<std::size_t>(b) * C + c];
        std::size_t lc = 0, rc = 0;
        double lmax = -1.0, rmax = -1.0, mass = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
          mass += total[c];
          if (left[c] > lmax) lmax = left[c], lc = c;
          if (total[c] - left[c] > rmax) rmax = total[c] - left[c], rc = c;
        }
        const double err = mass - lmax - rmax;
        if (err < best_err - 1e-15) {
          best_err = err;
          best = {f, bins.cuts(f)[static_cast<std::size_t>(b)], static_cast<int>(lc),
                  static_cast<int>(rc), 0.0};
        }
      }
    }
    if (!std::isfinite(best_err)) break;
    double mass = 0.0;
    for (double v : total) mass += v;
    const double err = std::max(best_err / mass, 0.0);
    if (err >= 1.0 - 1.0 / n_classes) break;
    const double kMaxAlpha = 20.0;
    best.alpha = std::min(kMaxAlpha, std::log((1.0 - err) / std::max(err, 1e-12)) +
                                         std::log(static_cast<double>(n_classes - 1)));
    stumps_.push_back(best);
    if (err <= 1e-12) break;
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
      const int pred = X(i, best.feature) <= best.threshold ? best.left : best.right;
      if (pred != y[static_cast<std::size_t>(i)]) w[static_cast<std::size_t>(i)] *= std::exp(best.alpha);
      norm += w[static_cast<std::size_t>(i)];
    }
    for (double &v : w) v /= norm;
  }
}

void StumpBoost::predict_row(std::span<const double> x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (n_classes_ < 2) {
    std::fill(out.begin(), out.end(), 1.0);
    return;
  }
  if (stumps_.empty()) {
    std::fill(out.begin(), out.end(), 1.0 / n_classes_);
    return;
  }
  double total = 0.0;
  for (const auto &s : stumps_) {
    const int c = x[static_cast<std::size_t>(s.feature)] <= s.threshold ? s.left : s.right;
    out[static_cast<std::size_t>(c)] += s.alpha;
    total += s.alpha;
  }
  for (double &v : out) v = v / total / (n_classes_ - 1);
  softmax_inplace(out);
}

std::string StumpBoost::id() const { return fmt::format("stump-boost:{}", rounds_); }

nlohmann::json StumpBoost::to_json() const {
  nlohmann::json stumps = nlohmann::json::array();
  for (const auto &s : stumps_)
    stumps.push_back({s.feature, s.threshold, s.left, s.right, s.alpha});
  return {{"type", "stump-boost"}, {"rounds", rounds_}, {"n_classes", n_classes_},
          {"stumps", stumps}};
}

std::unique_ptr<StumpBoost> StumpBoost::from_json(const nlohmann::json &j) {
  auto sb = std::make_unique<StumpBoost>(j.at("rounds").get<int>());
  sb->n_classes_ = j.at("n_classes").get<int>();
  for (const auto &s : j.at("stumps"))
    sb->stumps_.push_back({s.at(0).get<int>(), s.at(1).get<double>(), s.at(2).get<int>(),
                           s.at(3).get<int>(), s.at(4).get<double>()});
  return sb;
}

// --- factory ------------------------------------------------------------------

std::unique_ptr<BaseLearner> default_learner(std::string_view spec) {
  const auto parts = split_colon(spec);
  const std::string_view kind = parts.front();
  if (kind == "rf" && (parts.size() == 1 || parts.size() == 3)) {
    int trees = 100, depth = 12;
    if (parts.size() == 3) {
      trees = parse_spec_number<int>(parts[1], spec);
      depth = parse_spec_number<int>(parts[2], spec);
    }
    if (trees < 1 || depth < 1)
      throw UsageError(fmt::format("learner spec \"{}\": trees and depth must be >= 1", spec));
    return std::make_unique<RandomForest>(trees, depth);
  }
  if (kind == "logreg" && parts.size() <= 2) {
    const double l2 = parts.size() == 2 ? parse_spec_number<double>(parts[1], spec) : 1.0;
    if (!(l2 >= 0.0)) throw UsageError(fmt::format("learner spec \"{}\": l2 must be >= 0", spec));
    return std::make_unique<LogisticRegression>(l2);
  }
  if (kind == "stump-boost" && parts.size() <= 2) {
    const int rounds = parts.size() == 2 ? parse_spec_number<int>(parts[1], spec) : 50;
    if (rounds < 1) throw UsageError(fmt::format("learner spec \"{}\": rounds must be >= 1", spec));
    return std::make_unique<StumpBoost>(rounds);
  }
  throw UsageError(fmt::format("unknown learner spec \"{}\"; {}", spec, kValidSpecs));
}

std::string canonical_learner_spec(std::string_view spec) { return default_learner(spec)->id(); }

std::unique_ptr<BaseLearner> learner_from_json(const nlohmann::json &j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "rf") return RandomForest::from_json(j);
  if (type == "logreg") return LogisticRegression::from_json(j);
  if (type == "stump-boost") return StumpBoost::from_json(j);
  if (type == "constant") return ConstantLearner::from_json(j);
  throw ValidationError(ErrorKind::kBadModel, "unknown learner type \"" + type + "\"");
}

}  // namespace emo
