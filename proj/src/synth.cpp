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

#include "erfc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <fmt/format.h>

#include "erfc/error.hpp"
#include "erfc/seeding.hpp"

namespace emo {
namespace {

int sample(std::span<const double> probs, Rng &rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  for (std::size_t c = 0; c + 1 < probs.size(); ++c) {
    if (u < probs[c]) return static_cast<int>(c);
    u -= probs[c];
  }
  return static_cast<int>(probs.size()) - 1;
}

Matrix mix_rows(int C, double diag) {
  Matrix m(static_cast<std::size_t>(C), std::vector<double>(static_cast<std::size_t>(C)));
  const double off = C > 1 ? (1.0 - diag) / (C - 1) : 0.0;
  for (int a = 0; a < C; ++a)
    for (int b = 0; b < C; ++b) m[a][b] = a == b ? (C > 1 ? diag : 1.0) : off;
  return m;
}

Matrix shift_rows(int C, double on) {
  Matrix m(static_cast<std::size_t>(C), std::vector<double>(static_cast<std::size_t>(C)));
  const double off = (1.0 - on) / (C - 1);
  for (int a = 0; a < C; ++a)
    for (int b = 0; b < C; ++b) m[a][b] = b == (a + 1) % C ? on : off;
  return m;
}

// Six-class rows built from a four-state chain over {H/E, S, N, A/F}; twins
// split their coarse mass evenly so they are exchangeable.
Matrix twin_rows(double diag) {
  static constexpr int kCoarse[6] = {0, 0, 1, 2, 3, 3};
  static constexpr double kShare[6] = {0.5, 0.5, 1.0, 1.0, 0.5, 0.5};
  const Matrix q = mix_rows(4, diag);
  Matrix m(6, std::vector<double>(6));
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) m[a][b] = q[kCoarse[a]][kCoarse[b]] * kShare[b];
  return m;
}

std::vector<std::array<double, 3>> attribute_means(int C) {
  // Activation, valence, dominance per class on the 1..5 scale.
  std::vector<std::array<double, 3>> six = {{3.6, 3.9, 3.2}, {4.1, 3.8, 3.6}, {2.1, 2.0, 2.2},
                                            {2.8, 3.0, 2.9}, {4.0, 1.8, 4.0}, {3.3, 2.0, 3.2}};
  if (C == 6) return six;
  return {six[0], six[2], six[3], six[4]};
}

// Face centres of the cube [1.5, 4.5]^3: pairwise distance at least 2.1.
std::vector<std::array<double, 3>> spread_means(int C) {
  std::vector<std::array<double, 3>> faces = {{1.5, 3.0, 3.0}, {4.5, 3.0, 3.0}, {3.0, 1.5, 3.0},
                                              {3.0, 4.5, 3.0}, {3.0, 3.0, 1.5}, {3.0, 3.0, 4.5}};
  faces.resize(static_cast<std::size_t>(C));
  return faces;
}

Eigen::MatrixXd to_eigen(const Matrix &m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.size()));
  for (std::size_t a = 0; a < m.size(); ++a)
    for (std::size_t b = 0; b < m[a].size(); ++b)
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = m[a][b];
  return out;
}

Eigen::MatrixXd centres_for(std::size_t dim, int groups, double separation, std::uint64_t seed) {
  if (dim == 0) return {};
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(static_cast<Eigen::Index>(dim), groups);
  for (Eigen::Index c = 0; c < g.cols(); ++c)
    for (Eigen::Index r = 0; r < g.rows(); ++r) g(r, c) = normal(rng);
  Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() *
                      Eigen::MatrixXd::Identity(g.rows(), groups);
  return (q * (separation / std::sqrt(2.0))).transpose();
}

struct GeneratedConversation {
  Conversation conversation;
  std::vector<std::array<int, 2>> labels;
  std::vector<std::pair<FeatureKey, std::array<std::vector<double>, 3>>> features;
};

GeneratedConversation generate_one(const SynthConfig &cfg, const EmissionCentres &centres,
                                   const Eigen::VectorXd &pi,
                                   int index) {
  const int C = cfg.n_classes;
  Rng rng(derive_seed(cfg.seed, {fnv1a64("conversation"), static_cast<std::uint64_t>(index)}));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int session = 1 + index * cfg.n_sessions / cfg.n_conversations;
  GeneratedConversation out;
  out.conversation.conv_id = fmt::format("Ses{:02d}_conv{:04d}", session, index);
  const std::string &conv_id = out.conversation.conv_id;

  const int lo = std::max(1, static_cast<int>(std::ceil(cfg.t_mean / 2.0)));
  const int hi = std::max(lo, static_cast<int>(std::floor(1.5 * cfg.t_mean)));
  const int T = std::uniform_int_distribution<int>(lo, hi)(rng);

  // One extra step so the attribute lead has a successor for the last turn.
  std::vector<std::array<int, 2>> chain;
  const int start = sample(std::span<const double>(pi.data(), static_cast<std::size_t>(pi.size())), rng);
  chain.push_back({start / C, start % C});
  for (int t = 1; t <= T; ++t) {
    std::array<int, 2> lab{};
    for (int slot = 0; slot < 2; ++slot) {
      const auto own = static_cast<std::size_t>(chain.back()[slot]);
      const auto partner = static_cast<std::size_t>(chain.back()[1 - slot]);
      std::vector<double> p(static_cast<std::size_t>(C));
      for (std::size_t c = 0; c < p.size(); ++c)
        p[c] = cfg.alpha * cfg.p_cross[partner][c] + (1.0 - cfg.alpha) * cfg.p_self[own][c];
      lab[slot] = sample(p, rng);
    }
    chain.push_back(lab);
  }

  const bool trailing = unit(rng) < cfg.trailing_prob;
  const std::array<std::string, 2> tags =
      unit(rng) < 0.5 ? std::array<std::string, 2>{"F", "M"} : std::array<std::string, 2>{"M", "F"};
  const Scheme scheme = cfg.label_scheme();
  double clock = 0.0;
  int utt_counter = 0;
  for (int t = 0; t < T; ++t) {
    std::array<int, 2> lab = chain[static_cast<std::size_t>(t)];
    for (int slot = 0; slot < 2; ++slot) {
      if (slot == 1 && trailing && t == T - 1) {
        lab[1] = -1;
        continue;
      }
      const int c = lab[slot];
      const int g = cfg.emission_groups[static_cast<std::size_t>(c)];
      std::optional<AvdTriple> avd;
      if (cfg.emit_avd) {
        const auto &now = cfg.avd_means[static_cast<std::size_t>(c)];
        const auto &next =
            cfg.avd_means[static_cast<std::size_t>(chain[static_cast<std::size_t>(t + 1)][slot])];
        std::array<double, 3> v{};
        for (int d = 0; d < 3; ++d)
          v[d] = std::clamp((1.0 - cfg.avd_lead) * now[d] + cfg.avd_lead * next[d] +
                                cfg.avd_noise * normal(rng),
                            1.0, 5.0);
        avd = AvdTriple{v[0], v[1], v[2]};
      }
      const int n_utts = std::uniform_int_distribution<int>(1, 3)(rng);
      for (int u = 0; u < n_utts; ++u) {
        UtteranceRecord rec;
        rec.conv_id = conv_id;
        rec.utt_id = fmt::format("{}_{}{:03d}", conv_id, tags[slot], utt_counter++);
        rec.speaker = tags[slot];
        rec.t_start = clock;
        rec.t_end = clock + std::uniform_real_distribution<double>(1.0, 4.0)(rng);
        clock = rec.t_end + 0.25;
        rec.text = fmt::format("turn {} part {}", t, u + 1);
        rec.emotion = decode_emotion(c, scheme);
        rec.avd = avd;
        out.conversation.utterances.push_back(std::move(rec));
      }
      std::array<std::vector<double>, 3> vecs;
      const std::array<const Eigen::MatrixXd *, 3> cs{&centres.text, &centres.audio,
                                                      &centres.speaker};
      for (int m = 0; m < 3; ++m) {
        const Eigen::MatrixXd &ctr = *cs[static_cast<std::size_t>(m)];
        for (Eigen::Index d = 0; d < ctr.cols(); ++d) vecs[m].push_back(ctr(g, d) + normal(rng));
      }
      out.features.push_back({FeatureKey{conv_id, t, slot}, std::move(vecs)});
    }
    out.labels.push_back(lab);
  }
  return out;
}

void check_stochastic(const Matrix &m, int C, const char *name) {
  if (static_cast<int>(m.size()) != C)
    throw UsageError(fmt::format("{} must be {}x{}", name, C, C));
  for (const auto &row : m) {
    if (static_cast<int>(row.size()) != C)
      throw UsageError(fmt::format("{} must be {}x{}", name, C, C));
    double s = 0.0;
    for (double v : row) {
      if (!(v >= 0.0)) throw UsageError(fmt::format("{} has a negative entry", name));
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-12) throw UsageError(fmt::format("{} rows must sum to 1", name));
  }
}

}  // namespace

Scheme SynthConfig::label_scheme() const { return n_classes == 4 ? Scheme::kFour : Scheme::kSix; }

int SynthConfig::n_groups() const {
  return emission_groups.empty() ? 0 : *std::max_element(emission_groups.begin(), emission_groups.end()) + 1;
}

void SynthConfig::validate() const {
  if (n_classes != 4 && n_classes != 6) throw UsageError("n_classes must be 4 or 6");
  if (!(t_mean >= 1.0)) throw UsageError("t_mean must be >= 1");
  if (n_conversations < 1) throw UsageError("n_conversations must be >= 1");
  if (n_sessions < 1 || n_sessions > 99) throw UsageError("n_sessions must be in [1, 99]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw UsageError("alpha must be in [0, 1]");
  check_stochastic(p_self, n_classes, "p_self");
  check_stochastic(p_cross, n_classes, "p_cross");
  if (!(separation >= 0.0)) throw UsageError("separation must be >= 0");
  if (static_cast<int>(emission_groups.size()) != n_classes)
    throw UsageError("emission_groups needs one entry per class");
  for (int g : emission_groups)
    if (g < 0 || g >= n_classes) throw UsageError("emission group out of range");
  if (static_cast<int>(avd_means.size()) != n_classes)
    throw UsageError("avd_means needs one row per class");
  for (const auto &m : avd_means)
    for (double v : m)
      if (!(v >= 1.0 && v <= 5.0)) throw UsageError("avd_means must lie in [1, 5]");
  if (!(avd_noise >= 0.0)) throw UsageError("avd_noise must be >= 0");
  if (!(avd_lead >= 0.0 && avd_lead <= 1.0)) throw UsageError("avd_lead must be in [0, 1]");
  if (!(trailing_prob >= 0.0 && trailing_prob <= 1.0))
    throw UsageError("trailing_prob must be in [0, 1]");
  for (std::size_t d : {dims.text, dims.audio, dims.speaker})
    if (d != 0 && static_cast<int>(d) < n_groups())
      throw UsageError("feature dimensions must be 0 or at least the number of emission groups");
}

nlohmann::json to_json(const SynthConfig &c) {
  nlohmann::json j;
  j["n_classes"] = c.n_classes;
  j["t_mean"] = c.t_mean;
  j["n_conversations"] = c.n_conversations;
  j["n_sessions"] = c.n_sessions;
  j["alpha"] = c.alpha;
  j["p_self"] = c.p_self;
  j["p_cross"] = c.p_cross;
  j["separation"] = c.separation;
  j["emission_groups"] = c.emission_groups;
  j["avd_means"] = c.avd_means;
  j["avd_noise"] = c.avd_noise;
  j["avd_lead"] = c.avd_lead;
  j["emit_avd"] = c.emit_avd;
  j["trailing_prob"] = c.trailing_prob;
  j["dims"] = {{"text", c.dims.text}, {"audio", c.dims.audio}, {"speaker", c.dims.speaker}};
  j["seed"] = c.seed;
  return j;
}

SynthConfig synth_config_from_json(const nlohmann::json &j) {
  SynthConfig c = synth_preset(j.value("preset", "default"), j.value("seed", std::uint64_t{0}));
  try {
    if (j.contains("n_classes") && j.at("n_classes").get<int>() != c.n_classes) {
      const SynthConfig base = c;
      c.n_classes = j.at("n_classes").get<int>();
      c.p_self = mix_rows(c.n_classes, base.p_self[0][0]);
      c.p_cross = mix_rows(c.n_classes, base.p_cross[0][0]);
      c.emission_groups.resize(static_cast<std::size_t>(c.n_classes));
      for (int i = 0; i < c.n_classes; ++i) c.emission_groups[static_cast<std::size_t>(i)] = i;
      c.avd_means = attribute_means(c.n_classes);
    }
    c.t_mean = j.value("t_mean", c.t_mean);
    c.n_conversations = j.value("n_conversations", c.n_conversations);
    c.n_sessions = j.value("n_sessions", c.n_sessions);
    c.alpha = j.value("alpha", c.alpha);
    c.p_self = j.value("p_self", c.p_self);
    c.p_cross = j.value("p_cross", c.p_cross);
    c.separation = j.value("separation", c.separation);
    c.emission_groups = j.value("emission_groups", c.emission_groups);
    c.avd_means = j.value("avd_means", c.avd_means);
    c.avd_noise = j.value("avd_noise", c.avd_noise);
    c.avd_lead = j.value("avd_lead", c.avd_lead);
    c.emit_avd = j.value("emit_avd", c.emit_avd);
    c.trailing_prob = j.value("trailing_prob", c.trailing_prob);
    if (j.contains("dims")) {
      const auto &d = j.at("dims");
      c.dims.text = d.value("text", c.dims.text);
      c.dims.audio = d.value("audio", c.dims.audio);
      c.dims.speaker = d.value("speaker", c.dims.speaker);
    }
  } catch (const nlohmann::json::exception &e) {
    throw UsageError(fmt::format("bad synth config: {}", e.what()));
  }
  c.validate();
  return c;
}

std::vector<std::string> synth_preset_names() {
  return {"default", "separable", "influence", "avd", "merge"};
}

SynthConfig synth_preset(const std::string &name, std::uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  c.n_classes = 6;
  c.emission_groups = {0, 1, 2, 3, 4, 5};
  c.avd_means = attribute_means(6);
  c.p_self = mix_rows(6, 0.6);
  c.p_cross = mix_rows(6, 0.5);
  if (name == "default") {
    c.separation = 2.0;
  } else if (name == "separable") {
    c.separation = 12.0;
  } else if (name == "influence") {
    c.alpha = 0.9;
    c.p_self = mix_rows(6, 1.0 / 6.0);
    c.p_cross = shift_rows(6, 0.9);
    c.separation = 0.75;
  } else if (name == "avd") {
    c.separation = 1.0;
    c.avd_means = spread_means(6);
    c.avd_noise = 0.25;
    c.avd_lead = 0.8;
  } else if (name == "merge") {
    c.separation = 3.0;
    c.emission_groups = {0, 0, 1, 2, 3, 3};
    c.p_self = twin_rows(0.9);
    c.p_cross = twin_rows(0.9);
    c.avd_means[1] = c.avd_means[0];
    c.avd_means[5] = c.avd_means[4];
  } else {
    throw UsageError(fmt::format("unknown synth preset '{}' (valid: default, separable, "
                                 "influence, avd, merge)",
                                 name));
  }
  c.validate();
  return c;
}

Eigen::MatrixXd joint_transition(const SynthConfig &cfg) {
  const int C = cfg.n_classes;
  const Eigen::MatrixXd self = to_eigen(cfg.p_self);
  const Eigen::MatrixXd cross = to_eigen(cfg.p_cross);
  Eigen::MatrixXd M(C * C, C * C);
  for (int a = 0; a < C; ++a)
    for (int b = 0; b < C; ++b)
      for (int a2 = 0; a2 < C; ++a2)
        for (int b2 = 0; b2 < C; ++b2) {
          const double pa = cfg.alpha * cross(b, a2) + (1.0 - cfg.alpha) * self(a, a2);
          const double pb = cfg.alpha * cross(a, b2) + (1.0 - cfg.alpha) * self(b, b2);
          M(a * C + b, a2 * C + b2) = pa * pb;
        }
  return M;
}

Eigen::VectorXd joint_stationary(const SynthConfig &cfg) {
  const Eigen::MatrixXd M = joint_transition(cfg);
  // The lazy chain (I + M) / 2 has the same fixed point and is aperiodic.
  const Eigen::MatrixXd lazy =
      0.5 * (Eigen::MatrixXd::Identity(M.rows(), M.cols()) + M).transpose();
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(M.rows(), 1.0 / static_cast<double>(M.rows()));
  for (int it = 0; it < 100000; ++it) {
    Eigen::VectorXd next = lazy * pi;
    next /= next.sum();
    const double delta = (next - pi).lpNorm<1>();
    pi = next;
    if (delta < 1e-15) break;
  }
  return pi;
}

std::vector<std::array<int, 2>> simulate_chain(const SynthConfig &cfg, std::size_t n_turns,
                                               std::uint64_t seed) {
  cfg.validate();
  const int C = cfg.n_classes;
  const Eigen::MatrixXd M = joint_transition(cfg);
  const Eigen::VectorXd pi = joint_stationary(cfg);
  Rng rng(seed);
  std::vector<std::array<int, 2>> out;
  if (n_turns == 0) return out;
  int s = sample(std::span<const double>(pi.data(), static_cast<std::size_t>(pi.size())), rng);
  out.push_back({s / C, s % C});
  std::vector<double> row(static_cast<std::size_t>(C * C));
  while (out.size() < n_turns) {
    for (int j = 0; j < C * C; ++j) row[static_cast<std::size_t>(j)] = M(s, j);
    s = sample(row, rng);
    out.push_back({s / C, s % C});
  }
  return out;
}

EmissionCentres emission_centres(const SynthConfig &cfg) {
  const int G = cfg.n_groups();
  const auto tag = fnv1a64("centres");
  return {centres_for(cfg.dims.text, G, cfg.separation, derive_seed(cfg.seed, {tag, 0})),
          centres_for(cfg.dims.audio, G, cfg.separation, derive_seed(cfg.seed, {tag, 1})),
          centres_for(cfg.dims.speaker, G, cfg.separation, derive_seed(cfg.seed, {tag, 2}))};
}

SynthCorpus generate(const SynthConfig &cfg) {
  cfg.validate();
  const EmissionCentres centres = emission_centres(cfg);
  const Eigen::VectorXd pi = joint_stationary(cfg);
  std::vector<GeneratedConversation> convs(static_cast<std::size_t>(cfg.n_conversations));
  parallel_for(convs.size(), [&](std::size_t i) {
    convs[i] = generate_one(cfg, centres, pi, static_cast<int>(i));
  });

  SynthCorpus out{{},
                  FeatureStore(Modality::kText, cfg.dims.text),
                  FeatureStore(Modality::kAudio, cfg.dims.audio),
                  FeatureStore(Modality::kSpeaker, cfg.dims.speaker),
                  {cfg, {}}};
  std::vector<UtteranceRecord> records;
  for (auto &g : convs) {
    for (auto &[key, vecs] : g.features) {
      out.text.insert(key, vecs[0]);
      out.audio.insert(key, vecs[1]);
      out.speaker.insert(key, vecs[2]);
    }
    out.truth.labels[g.conversation.conv_id] = std::move(g.labels);
    for (auto &u : g.conversation.utterances) records.push_back(std::move(u));
  }
  out.conversations = group_conversations(std::move(records));
  return out;
}

nlohmann::json truth_to_json(const SynthTruth &truth) {
  nlohmann::json j;
  j["format"] = "erfc-synth-truth/1";
  j["config"] = to_json(truth.cfg);
  j["class_order"] = class_names(truth.cfg.label_scheme());
  auto &labels = j["labels"] = nlohmann::json::object();
  for (const auto &[conv, turns] : truth.labels) {
    auto arr = nlohmann::json::array();
    for (const auto &lab : turns) {
      auto pair = nlohmann::json::array();
      for (int v : lab) pair.push_back(v < 0 ? nlohmann::json(nullptr) : nlohmann::json(v));
      arr.push_back(pair);
    }
    labels[conv] = arr;
  }
  return j;
}

void write_synth(const std::filesystem::path &dir, const SynthCorpus &corpus) {
  std::filesystem::create_directories(dir);
  save_utterances(dir / "utterances.jsonl", corpus.conversations);
  if (corpus.text.dim() > 0) save_features(dir / "text.csv", corpus.text);
  if (corpus.audio.dim() > 0) save_features(dir / "audio.csv", corpus.audio);
  if (corpus.speaker.dim() > 0) save_features(dir / "speaker.csv", corpus.speaker);
  std::ofstream out(dir / "truth.json", std::ios::binary);
  if (!out) throw ValidationError(ErrorKind::kIo, "cannot write " + (dir / "truth.json").string());
  out << truth_to_json(corpus.truth).dump(1) << '\n';
}

}  // namespace emo
