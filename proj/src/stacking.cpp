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

#include "erfc/stacking.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "erfc/error.hpp"
#include "erfc/seeding.hpp"

namespace emo {
namespace {

struct HeadFit {
  std::unique_ptr<BaseLearner> learner;
  std::optional<std::string> warning;
};

HeadFit fit_head(const Eigen::MatrixXd &X, const std::vector<int> &rows,
                 const std::vector<int> &labels, int n_classes, const std::string &spec,
                 std::uint64_t seed) {
  Eigen::MatrixXd sub = X(rows, Eigen::all);
  std::set<int> distinct(labels.begin(), labels.end());
  HeadFit out;
  if (distinct.size() <= 1) {
    auto c = std::make_unique<ConstantLearner>();
    c->fit(sub, labels, n_classes, seed);
    out.learner = std::move(c);
    out.warning = labels.empty() ? "no training rows" : "single class in target column";
    return out;
  }
  out.learner = default_learner(spec);
  out.learner->fit(sub, labels, n_classes, seed);
  return out;
}

std::string target_name(int j, int k) {
  return fmt::format("slot {} horizon {}", j / (k + 1), j % (k + 1));
}

}  // namespace

int argmax_lowest(std::span<const double> probs) {
  int best = 0;
  for (std::size_t c = 1; c < probs.size(); ++c)
    if (probs[c] > probs[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  return best;
}

void Prediction::apply_mask(const std::vector<std::optional<int>> &truth) {
  for (std::size_t j = 0; j < targets.size() && j < truth.size(); ++j)
    if (!truth[j]) targets[j].reset();
}

int conversation_fold(const std::string &conv_id, std::uint64_t seed, int folds) {
  return static_cast<int>(derive_seed(seed, {fnv1a64(conv_id)}) % static_cast<std::uint64_t>(folds));
}

StackedForecaster StackedForecaster::train(const std::vector<Example> &examples,
                                           const WindowConfig &cfg, const Options &options) {
  if (examples.empty()) throw ValidationError(ErrorKind::kEmptyInput, "no training examples");
  if (options.oof_folds < 2) throw UsageError("stacking needs at least 2 out-of-fold folds");
  cfg.validate();
  default_learner(options.learner);  // reject bad specs before any work

  StackedForecaster model;
  model.cfg_ = cfg;
  model.options_ = options;
  model.options_.learner = canonical_learner_spec(options.learner);
  const int K = options.oof_folds;
  const int J = cfg.n_targets();
  const int C = cfg.class_count();

  // Canonical row order makes training independent of presentation order.
  std::vector<const Example *> rows;
  for (const auto &e : examples) rows.push_back(&e);
  std::sort(rows.begin(), rows.end(), [](const Example *a, const Example *b) {
    return std::tie(a->conv_id, a->t) < std::tie(b->conv_id, b->t);
  });
  const std::size_t p = rows.front()->x.size();
  model.input_dim_ = p;
  const auto N = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd X(N, static_cast<Eigen::Index>(p));
  std::vector<int> fold(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Example &e = *rows[i];
    if (e.x.size() != p)
      throw ValidationError(ErrorKind::kDimensionMismatch,
                            fmt::format("example ({}, {}) has {} inputs, expected {}",
                                        e.conv_id, e.t, e.x.size(), p));
    if (e.targets.size() != static_cast<std::size_t>(J))
      throw ValidationError(ErrorKind::kDimensionMismatch,
                            fmt::format("example ({}, {}) has {} targets, expected {}",
                                        e.conv_id, e.t, e.targets.size(), J));
    for (std::size_t c = 0; c < p; ++c) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = e.x[c];
    auto [it, inserted] = model.folds_.try_emplace(e.conv_id, 0);
    if (inserted) it->second = conversation_fold(e.conv_id, options.seed, K);
    fold[i] = it->second;
    model.train_ids_.insert(e.conv_id);
  }

  auto rows_for = [&](int j, int exclude_fold) {
    std::pair<std::vector<int>, std::vector<int>> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto &t = rows[i]->targets[static_cast<std::size_t>(j)];
      if (!t || fold[i] == exclude_fold) continue;
      out.first.push_back(static_cast<int>(i));
      out.second.push_back(*t);
    }
    return out;
  };

  // Level 1: K out-of-fold models per target plus one on all rows.
  model.fold_ids_.assign(static_cast<std::size_t>(K), {});
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int f = 0; f < K; ++f)
      if (fold[i] != f) {
        bool labeled = std::any_of(rows[i]->targets.begin(), rows[i]->targets.end(),
                                   [](const auto &t) { return t.has_value(); });
        if (labeled) model.fold_ids_[static_cast<std::size_t>(f)].insert(rows[i]->conv_id);
      }

  Eigen::MatrixXd oof = Eigen::MatrixXd::Zero(N, static_cast<Eigen::Index>(J) * C);
  std::vector<HeadFit> full(static_cast<std::size_t>(J));
  const std::size_t n_tasks = static_cast<std::size_t>((K + 1) * J);
  parallel_for(n_tasks, [&](std::size_t task) {
    const int f = static_cast<int>(task) / J;
    const int j = static_cast<int>(task) % J;
    const auto seed = derive_seed(options.seed, {1, static_cast<std::uint64_t>(f),
                                                 static_cast<std::uint64_t>(j)});
    auto [train_rows, labels] = rows_for(j, f < K ? f : -1);
    HeadFit head = fit_head(X, train_rows, labels, C, model.options_.learner, seed);
    if (f == K) {
      full[static_cast<std::size_t>(j)] = std::move(head);
      return;
    }
    std::vector<double> xrow(p), probs(static_cast<std::size_t>(C));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (fold[i] != f) continue;
      head.learner->predict_row(rows[i]->x, probs);
      for (int c = 0; c < C; ++c)
        oof(static_cast<Eigen::Index>(i), j * C + c) = probs[static_cast<std::size_t>(c)];
    }
  });

  // Level 2 on [x | out-of-fold level-1 probabilities].
  Eigen::MatrixXd Z(N, X.cols() + oof.cols());
  Z << X, oof;
  std::vector<HeadFit> second(static_cast<std::size_t>(J));
  parallel_for(static_cast<std::size_t>(J), [&](std::size_t j) {
    auto [train_rows, labels] = rows_for(static_cast<int>(j), -1);
    second[j] = fit_head(Z, train_rows, labels, C, model.options_.learner,
                         derive_seed(options.seed, {2, j}));
  });

  for (int j = 0; j < J; ++j) {
    auto &h1 = full[static_cast<std::size_t>(j)];
    auto &h2 = second[static_cast<std::size_t>(j)];
    if (h1.warning) {
      model.warnings_.push_back(fmt::format("{}: {}, using a constant head", target_name(j, cfg.k),
                                            *h1.warning));
      spdlog::warn("{}", model.warnings_.back());
    }
    model.level1_.push_back(std::move(h1.learner));
    model.level2_.push_back(std::move(h2.learner));
  }
  return model;
}

std::vector<double> StackedForecaster::level1_probabilities(std::span<const double> x) const {
  const int C = class_count();
  std::vector<double> out(level1_.size() * static_cast<std::size_t>(C));
  for (std::size_t j = 0; j < level1_.size(); ++j)
    level1_[j]->predict_row(x, std::span<double>(out.data() + j * static_cast<std::size_t>(C),
                                                 static_cast<std::size_t>(C)));
  return out;
}

Prediction StackedForecaster::predict(std::span<const double> x) const {
  if (x.size() != input_dim_)
    throw ValidationError(ErrorKind::kDimensionMismatch,
                          fmt::format("input has dimension {}, model expects {}", x.size(),
                                      input_dim_));
  std::vector<double> z(x.begin(), x.end());
  const auto l1 = level1_probabilities(x);
  z.insert(z.end(), l1.begin(), l1.end());
  Prediction pred;
  pred.targets.resize(level2_.size());
  for (std::size_t j = 0; j < level2_.size(); ++j) {
    TargetPrediction tp;
    tp.probs.resize(static_cast<std::size_t>(class_count()));
    level2_[j]->predict_row(z, tp.probs);
    tp.label = argmax_lowest(tp.probs);
    pred.targets[j] = std::move(tp);
  }
  return pred;
}

std::vector<Prediction> StackedForecaster::predict_batch(const std::vector<Example> &examples) const {
  std::vector<Prediction> out(examples.size());
  parallel_for(examples.size(), [&](std::size_t i) { out[i] = predict(examples[i].x); });
  return out;
}

int StackedForecaster::fold_of(const std::string &conv_id) const {
  auto it = folds_.find(conv_id);
  return it == folds_.end() ? -1 : it->second;
}

nlohmann::json StackedForecaster::to_json() const {
  nlohmann::json j;
  j["format"] = "erfc-model/1";
  j["window"] = emo::to_json(cfg_);
  j["class_order"] = class_names(cfg_.scheme);
  j["learner"] = options_.learner;
  j["seed"] = options_.seed;
  j["oof_folds"] = options_.oof_folds;
  j["input_dim"] = input_dim_;
  j["fold_assignment"] = folds_;
  auto &l1 = j["level1"] = nlohmann::json::array();
  for (const auto &h : level1_) l1.push_back(h->to_json());
  auto &l2 = j["level2"] = nlohmann::json::array();
  for (const auto &h : level2_) l2.push_back(h->to_json());
  j["warnings"] = warnings_;
  return j;
}

StackedForecaster StackedForecaster::from_json(const nlohmann::json &j) {
  if (j.value("format", "") != "erfc-model/1")
    throw ValidationError(ErrorKind::kBadModel, "not an erfc-model/1 document");
  StackedForecaster m;
  m.cfg_ = window_from_json(j.at("window"));
  if (j.at("class_order").get<std::vector<std::string>>() != class_names(m.cfg_.scheme))
    throw ValidationError(ErrorKind::kBadModel, "class order does not match the scheme");
  m.options_.learner = j.at("learner").get<std::string>();
  m.options_.seed = j.at("seed").get<std::uint64_t>();
  m.options_.oof_folds = j.at("oof_folds").get<int>();
  m.input_dim_ = j.at("input_dim").get<std::size_t>();
  m.folds_ = j.at("fold_assignment").get<std::map<std::string, int>>();
  m.fold_ids_.assign(static_cast<std::size_t>(m.options_.oof_folds), {});
  for (const auto &[conv, f] : m.folds_) {
    m.train_ids_.insert(conv);
    for (int g = 0; g < m.options_.oof_folds; ++g)
      if (g != f) m.fold_ids_[static_cast<std::size_t>(g)].insert(conv);
  }
  for (const auto &h : j.at("level1")) m.level1_.push_back(learner_from_json(h));
  for (const auto &h : j.at("level2")) m.level2_.push_back(learner_from_json(h));
  if (static_cast<int>(m.level1_.size()) != m.cfg_.n_targets() ||
      m.level2_.size() != m.level1_.size())
    throw ValidationError(ErrorKind::kBadModel, "head count does not match 2*(k+1)");
  m.warnings_ = j.value("warnings", std::vector<std::string>{});
  return m;
}

void StackedForecaster::save(const std::filesystem::path &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError(ErrorKind::kIo, "cannot write " + path.string());
  out << to_json().dump() << '\n';
}

StackedForecaster StackedForecaster::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(ErrorKind::kIo, "cannot open model " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception &e) {
    throw ValidationError(ErrorKind::kBadModel, fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<Prediction> predict_conversation(const StackedForecaster &model,
                                             const ExampleBuilder &builder,
                                             const TurnedConversation &conv, HistoryMode mode) {
  builder.check_requirements(conv);
  const Scheme scheme = builder.config().scheme;
  History history = mode == HistoryMode::kTeacherForced ? true_history(conv, scheme)
                                                        : History(conv.turns.size());
  std::vector<Prediction> out;
  out.reserve(conv.turns.size());
  const int k = builder.config().k;
  for (int t = 0; t < static_cast<int>(conv.turns.size()); ++t) {
    Prediction pred = model.predict(builder.build_x(conv, t, history));
    if (mode == HistoryMode::kAutoregressive) {
      for (int slot = 0; slot < 2; ++slot)
        if (conv.turns[static_cast<std::size_t>(t)].sides[slot].present)
          history[static_cast<std::size_t>(t)][slot] =
              pred.targets[static_cast<std::size_t>(target_index(slot, 0, k))]->label;
    }
    pred.apply_mask(builder.build_targets(conv, t));
    out.push_back(std::move(pred));
  }
  return out;
}

}  // namespace emo
