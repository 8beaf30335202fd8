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

#include "erfc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "erfc/error.hpp"
#include "erfc/seeding.hpp"
#include "erfc/synth.hpp"

namespace emo {
namespace {

void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
}

std::vector<const TurnedConversation *> select(const CorpusData &data,
                                               const std::vector<std::string> &ids) {
  std::vector<const TurnedConversation *> out;
  for (const auto &id : ids) out.push_back(&data.find(id));
  return out;
}

std::vector<TurnedConversation> copy_of(const CorpusData &data,
                                        const std::vector<std::string> &ids) {
  std::vector<TurnedConversation> out;
  for (const auto *c : select(data, ids)) out.push_back(*c);
  return out;
}

std::string pct(double v) { return fmt::format("{:.1f}", display_round(v)); }

}  // namespace

const std::vector<ExperimentSpec> &experiment_grid() {
  static const std::vector<ExperimentSpec> grid = {
      {"E1", Scheme::kSix, true, 0, 3},  {"E2", Scheme::kSix, true, 1, 3},
      {"E3", Scheme::kSix, true, 2, 3},  {"E4", Scheme::kSix, true, 3, 3},
      {"E5", Scheme::kSix, false, 3, 3}, {"E6", Scheme::kFour, true, 3, 3},
  };
  return grid;
}

ExperimentSpec experiment_spec(const std::string &id) {
  for (const auto &s : experiment_grid())
    if (s.id == id) return s;
  throw UsageError(fmt::format("unknown experiment '{}' (valid: E1..E6)", id));
}

std::vector<ExperimentSpec> parse_spec_list(const std::string &list) {
  if (list == "all") return experiment_grid();
  std::vector<ExperimentSpec> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto spec = experiment_spec(item);
    if (std::none_of(out.begin(), out.end(), [&](const auto &s) { return s.id == spec.id; }))
      out.push_back(spec);
  }
  if (out.empty()) throw UsageError("no experiments selected");
  return out;
}

std::vector<std::string> SessionSplit::non_test() const {
  std::vector<std::string> out = train;
  out.insert(out.end(), validation.begin(), validation.end());
  std::sort(out.begin(), out.end());
  return out;
}

SessionSplit split_sessions(const std::vector<std::string> &conv_ids, std::uint64_t seed,
                            double holdout_fraction, const std::map<std::string, int> &overrides) {
  if (conv_ids.empty()) throw ValidationError(ErrorKind::kEmptyInput, "no conversations to split");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0))
    throw UsageError("holdout fraction must be in [0, 1)");
  std::map<std::string, int> session;
  for (const auto &id : conv_ids) session[id] = session_of(id, overrides);
  int last = 0;
  for (const auto &[id, s] : session) last = std::max(last, s);
  SessionSplit split;
  split.test_session = last;
  std::vector<std::string> train;
  for (const auto &[id, s] : session) (s == last ? split.test : train).push_back(id);
  if (train.empty())
    throw ValidationError(ErrorKind::kNoTestSession,
                          fmt::format("no test session: every conversation is in session {}", last));

  std::size_t n_hold = 0;
  if (train.size() >= 2 && holdout_fraction > 0.0)
    n_hold = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(train.size()))),
        1, train.size() - 1);
  std::vector<std::pair<std::uint64_t, std::string>> keyed;
  for (const auto &id : train) keyed.emplace_back(derive_seed(seed, {fnv1a64(id)}), id);
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t i = 0; i < keyed.size(); ++i)
    (i < n_hold ? split.validation : split.train).push_back(keyed[i].second);
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  return split;
}

std::vector<std::string> CorpusData::conv_ids() const {
  std::vector<std::string> out;
  for (const auto &c : conversations) out.push_back(c.conv_id);
  return out;
}

const TurnedConversation &CorpusData::find(const std::string &conv_id) const {
  auto it = std::lower_bound(conversations.begin(), conversations.end(), conv_id,
                             [](const TurnedConversation &c, const std::string &id) {
                               return c.conv_id < id;
                             });
  if (it == conversations.end() || it->conv_id != conv_id)
    throw ValidationError(ErrorKind::kDanglingKey, "unknown conversation " + conv_id);
  return *it;
}

CorpusData load_corpus(const std::filesystem::path &utterances, const std::filesystem::path &text,
                       const std::filesystem::path &audio, const std::filesystem::path &speaker) {
  CorpusData data;
  data.conversations = assemble_all(load_utterances(utterances));
  const auto keys = feature_keys(data.conversations);
  auto load = [&](const std::filesystem::path &p, Modality m) {
    return p.empty() ? FeatureStore(m, 0) : load_features(p, m, &keys);
  };
  data.text = load(text, Modality::kText);
  data.audio = load(audio, Modality::kAudio);
  data.speaker = load(speaker, Modality::kSpeaker);
  return data;
}

CorpusData corpus_from_synth(const SynthCorpus &synth) {
  return {assemble_all(synth.conversations), synth.text, synth.audio, synth.speaker};
}

std::optional<PcaModel> fit_modality_pca(const FeatureStore &store,
                                         const std::vector<std::string> &conv_ids, int requested,
                                         std::uint64_t seed) {
  if (requested <= 0 || store.dim() == 0) return std::nullopt;
  const std::set<std::string> ids(conv_ids.begin(), conv_ids.end());
  const Eigen::MatrixXd X = gather_rows(store, ids);
  const auto cap = std::min<Eigen::Index>(X.rows() - 1, X.cols());
  if (cap < 1)
    throw ValidationError(ErrorKind::kEmptyInput,
                          fmt::format("too few {} rows to fit PCA", modality_name(store.modality())));
  int n = requested;
  if (n > cap) {
    spdlog::info("{} PCA width {} capped at {}", modality_name(store.modality()), requested, cap);
    n = static_cast<int>(cap);
  }
  PcaModel model = fit_pca(X, n, seed);
  model.fit_ids = std::vector<std::string>(ids.begin(), ids.end());
  return model;
}

PreparedData prepare(const CorpusData &data, const PipelineOptions &opts) {
  PreparedData p;
  p.split = split_sessions(data.conv_ids(), derive_seed(opts.seed, {fnv1a64("holdout")}),
                           opts.holdout_fraction, opts.session_overrides);
  const auto fit_ids = p.split.non_test();
  p.audio_pca = fit_modality_pca(data.audio, fit_ids, opts.pca_audio, opts.seed);
  p.speaker_pca = fit_modality_pca(data.speaker, fit_ids, opts.pca_speaker, opts.seed);
  p.features = reduce_features(data.text, data.audio, data.speaker,
                               p.audio_pca ? &*p.audio_pca : nullptr,
                               p.speaker_pca ? &*p.speaker_pca : nullptr);
  return p;
}

Evaluation evaluate_conversations(const StackedForecaster &model, const ExampleBuilder &builder,
                                  const CorpusData &data, const std::vector<std::string> &conv_ids,
                                  HistoryMode mode) {
  const auto convs = select(data, conv_ids);
  std::vector<std::vector<Prediction>> preds(convs.size());
  std::vector<std::vector<TargetTruth>> truth(convs.size());
  for (const auto *c : convs) builder.check_requirements(*c);
  parallel_for(convs.size(), [&](std::size_t i) {
    const auto &conv = *convs[i];
    preds[i] = predict_conversation(model, builder, conv, mode);
    for (int t = 0; t < static_cast<int>(conv.turns.size()); ++t)
      truth[i].push_back(builder.build_targets(conv, t));
  });
  Evaluation out;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    for (auto &p : preds[i]) out.predictions.push_back(std::move(p));
    for (auto &t : truth[i]) out.truth.push_back(std::move(t));
  }
  return out;
}

void check_no_leakage(const PreparedData &prepared, const StackedForecaster &model) {
  const std::set<std::string> test(prepared.split.test.begin(), prepared.split.test.end());
  for (const auto *pca : {&prepared.audio_pca, &prepared.speaker_pca}) {
    if (!*pca) continue;
    for (const auto &id : (*pca)->fit_ids)
      if (test.count(id)) throw std::logic_error("PCA was fit on test conversation " + id);
  }
  for (const auto &id : model.train_conv_ids())
    if (test.count(id)) throw std::logic_error("model was trained on test conversation " + id);
  const auto &fold_ids = model.fold_training_ids();
  for (const auto &id : model.train_conv_ids()) {
    const int f = model.fold_of(id);
    if (f < 0 || fold_ids[static_cast<std::size_t>(f)].count(id))
      throw std::logic_error("out-of-fold model for " + id + " was trained on it");
  }
}

SpecResult run_window(const CorpusData &data, const PreparedData &prepared, const std::string &id,
                      const WindowConfig &window, const PipelineOptions &opts) {
  try {
    window.validate();
    SpecResult r;
    r.id = id;
    r.window = window;
    const ExampleBuilder builder(window, prepared.features);
    const auto train = build_examples(copy_of(data, prepared.split.train), prepared.features, window);
    StackedForecaster::Options mopts;
    mopts.learner = opts.learner;
    mopts.seed = derive_seed(opts.seed, {fnv1a64("model")});
    mopts.oof_folds = opts.oof_folds;
    const auto model = StackedForecaster::train(train, window, mopts);
    check_no_leakage(prepared, model);
    r.x_dim = model.input_dim();
    r.level2_dim = model.level2_dim();
    r.n_train_examples = train.size();
    r.warnings = model.warnings();

    const auto test = evaluate_conversations(model, builder, data, prepared.split.test, opts.mode);
    r.n_test_examples = test.truth.size();
    r.report = compute_metrics(test.predictions, test.truth, window.k, window.scheme);
    if (!prepared.split.validation.empty()) {
      const auto val =
          evaluate_conversations(model, builder, data, prepared.split.validation, opts.mode);
      r.n_validation_examples = val.truth.size();
      try {
        r.report.acc_validation =
            compute_metrics(val.predictions, val.truth, window.k, window.scheme).acc_overall;
      } catch (const ValidationError &e) {
        spdlog::warn("{}: no validation accuracy ({})", id, e.what());
      }
    }
    return r;
  } catch (const ValidationError &e) {
    throw ValidationError(e.kind(), fmt::format("{}: {}", id, e.what()));
  } catch (const UsageError &e) {
    throw UsageError(fmt::format("{}: {}", id, e.what()));
  }
}

SpecResult run_spec(const CorpusData &data, const PreparedData &prepared, const ExperimentSpec &spec,
                    const PipelineOptions &opts) {
  return run_window(data, prepared, spec.id, spec.window(), opts);
}

GridResult run_grid(const CorpusData &data, const std::vector<ExperimentSpec> &specs,
                    const PipelineOptions &opts) {
  const PreparedData prepared = prepare(data, opts);
  GridResult grid;
  grid.split = prepared.split;
  grid.learner = canonical_learner_spec(opts.learner);
  grid.seed = opts.seed;
  std::vector<std::optional<SpecResult>> slots(specs.size());
  parallel_for(specs.size(), [&](std::size_t i) {
    spdlog::info("{}: training", specs[i].id);
    slots[i] = run_spec(data, prepared, specs[i], opts);
    spdlog::info("{}: overall {:.1f}", specs[i].id, display_round(slots[i]->report.acc_overall));
  });
  for (auto &s : slots) grid.results.push_back(std::move(*s));
  return grid;
}

nlohmann::json spec_report_json(const SpecResult &r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["window"] = to_json(r.window);
  j["x_dim"] = r.x_dim;
  j["level2_dim"] = r.level2_dim;
  j["n_train_examples"] = r.n_train_examples;
  j["n_validation_examples"] = r.n_validation_examples;
  j["n_test_examples"] = r.n_test_examples;
  j["metrics"] = report_to_json(r.report);
  j["warnings"] = r.warnings;
  return j;
}

nlohmann::json grid_report_json(const GridResult &grid) {
  nlohmann::json j;
  j["format"] = "erfc-report/1";
  j["learner"] = grid.learner;
  j["seed"] = grid.seed;
  j["split"] = {{"test_session", grid.split.test_session},
                {"train", grid.split.train},
                {"validation", grid.split.validation},
                {"test", grid.split.test}};
  auto &specs = j["experiments"] = nlohmann::json::array();
  for (const auto &r : grid.results) specs.push_back(spec_report_json(r));
  return j;
}

std::string tables_markdown(const GridResult &grid) {
  std::map<std::string, const SpecResult *> by_id;
  for (const auto &r : grid.results) by_id[r.id] = &r;
  auto row = [](const SpecResult &r) {
    return fmt::format("| {} | {} | {} | {} | {} | {} | {} |\n", r.id, r.window.w_text,
                       r.window.use_avd ? "yes" : "no", pct(r.report.acc_current),
                       pct(r.report.acc_future_avg), pct(r.report.acc_overall),
                       r.report.acc_validation ? pct(*r.report.acc_validation) : "-");
  };
  const std::string header =
      "| Experiment | Window | AVD | Current turn | Future average | Overall | Validation |\n"
      "|---|---|---|---|---|---|---|\n";

  std::string md = fmt::format("# Experiment results\n\nLearner `{}`, seed {}, test session {}.\n\n",
                               grid.learner, grid.seed, grid.split.test_session);
  md += "## Context window\n\n" + header;
  for (const auto &r : grid.results)
    if (r.window.scheme == Scheme::kSix && r.window.use_avd) md += row(r);

  if (by_id.count("E4") && by_id.count("E5")) {
    md += "\n## Emotion attributes\n\n" + header + row(*by_id["E4"]) + row(*by_id["E5"]);
  }
  if (by_id.count("E4") && by_id.count("E6")) {
    md += "\n## Class scheme\n\n| Experiment | Classes | Current turn | Future average | Overall |\n"
          "|---|---|---|---|---|\n";
    for (const auto *r : {by_id["E4"], by_id["E6"]})
      md += fmt::format("| {} | {} | {} | {} | {} |\n", r->id, class_count(r->window.scheme),
                        pct(r->report.acc_current), pct(r->report.acc_future_avg),
                        pct(r->report.acc_overall));
  }

  md += "\n## Accuracy by horizon\n\n| Experiment |";
  int max_k = 0;
  for (const auto &r : grid.results) max_k = std::max(max_k, r.window.k);
  for (int h = 0; h <= max_k; ++h) md += fmt::format(" t+{} |", h);
  md += "\n|---|";
  for (int h = 0; h <= max_k; ++h) md += "---|";
  md += "\n";
  for (const auto &r : grid.results) {
    md += "| " + r.id + " |";
    for (int h = 0; h <= max_k; ++h)
      md += h <= r.window.k ? " " + pct(r.report.acc_per_horizon[static_cast<std::size_t>(h)]) + " |"
                            : " - |";
    md += "\n";
  }
  return md;
}

void write_grid(const std::filesystem::path &dir, const GridResult &grid) {
  std::filesystem::create_directories(dir);
  std::string horizons = "spec,horizon,accuracy\n";
  std::ostringstream confusion;
  confusion << "spec,true,pred,count\n";
  for (const auto &r : grid.results) {
    const auto sub = dir / r.id;
    std::filesystem::create_directories(sub);
    write_text(sub / "report.json", spec_report_json(r).dump(2) + "\n");
    std::ostringstream one;
    write_confusion_csv(one, r.report.confusion, r.window.scheme);
    write_text(sub / "confusion.csv", one.str());
    std::ostringstream tagged;
    write_confusion_csv(tagged, r.report.confusion, r.window.scheme, r.id);
    const std::string body = tagged.str();
    confusion << body.substr(body.find('\n') + 1);
    for (std::size_t h = 0; h < r.report.acc_per_horizon.size(); ++h)
      horizons += fmt::format("{},{},{:.4f}\n", r.id, h, r.report.acc_per_horizon[h]);
  }
  write_text(dir / "report.json", grid_report_json(grid).dump(2) + "\n");
  write_text(dir / "tables.md", tables_markdown(grid));
  write_text(dir / "horizons.csv", horizons);
  write_text(dir / "confusion.csv", confusion.str());
}

}  // namespace emo
