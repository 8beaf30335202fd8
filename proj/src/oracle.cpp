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

#include "erfc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "erfc/error.hpp"
#include "erfc/seeding.hpp"

namespace emo {
namespace {

double slot_max_average(const Eigen::RowVectorXd &joint, int C) {
  double total = 0.0;
  for (int slot = 0; slot < 2; ++slot) {
    double best = 0.0;
    for (int c = 0; c < C; ++c) {
      double m = 0.0;
      for (int o = 0; o < C; ++o) m += slot == 0 ? joint(c * C + o) : joint(o * C + c);
      best = std::max(best, m);
    }
    total += best;
  }
  return total / 2.0;
}

std::vector<Eigen::MatrixXd> powers(const Eigen::MatrixXd &M, int k) {
  std::vector<Eigen::MatrixXd> out{Eigen::MatrixXd::Identity(M.rows(), M.cols())};
  for (int h = 1; h <= k; ++h) out.push_back(out.back() * M);
  return out;
}

int draw(const Eigen::RowVectorXd &p, Rng &rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  for (Eigen::Index i = 0; i + 1 < p.size(); ++i) {
    if (u < p(i)) return static_cast<int>(i);
    u -= p(i);
  }
  return static_cast<int>(p.size()) - 1;
}

std::vector<OracleResult> exact_labels_only(const SynthConfig &cfg, int k) {
  const int C = cfg.n_classes;
  const Eigen::VectorXd pi = joint_stationary(cfg);
  const auto Mh = powers(joint_transition(cfg), k);
  std::vector<OracleResult> out;
  for (int h = 0; h <= k; ++h) {
    double acc = 0.0;
    for (Eigen::Index s = 0; s < pi.size(); ++s)
      acc += pi(s) * slot_max_average(Mh[static_cast<std::size_t>(h)].row(s), C);
    out.push_back({acc, 0.0, true});
  }
  return out;
}

std::vector<OracleResult> monte_carlo(const SynthConfig &cfg, int k, Conditioning cond,
                                      std::uint64_t trials, std::uint64_t seed) {
  const int C = cfg.n_classes;
  const int S = C * C;
  const Eigen::MatrixXd M = joint_transition(cfg);
  const auto Mh = powers(M, k);
  const Eigen::VectorXd pi = joint_stationary(cfg);
  const EmissionCentres centres = emission_centres(cfg);
  const std::array<const Eigen::MatrixXd *, 3> modal{&centres.text, &centres.audio,
                                                     &centres.speaker};
  const bool history = cond == Conditioning::kFullHistory;
  const bool use_avd = history && cfg.emit_avd && cfg.avd_lead > 0.0;
  const double var = std::max(cfg.avd_noise * cfg.avd_noise, 1e-12);

  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> sum(static_cast<std::size_t>(k + 1), 0.0);
  std::vector<double> sum_sq(static_cast<std::size_t>(k + 1), 0.0);
  std::vector<double> x;
  Eigen::RowVectorXd prior(S), post(S);
  std::array<std::vector<double>, 2> loglik;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    int prev = -1;
    if (history) {
      prev = draw(pi.transpose(), rng);
      prior = M.row(prev);
    } else {
      prior = pi.transpose();
    }
    const int cur = draw(prior, rng);
    const std::array<int, 2> lab{cur / C, cur % C};

    for (int slot = 0; slot < 2; ++slot) {
      auto &ll = loglik[static_cast<std::size_t>(slot)];
      ll.assign(static_cast<std::size_t>(C), 0.0);
      const int g_true = cfg.emission_groups[static_cast<std::size_t>(lab[slot])];
      for (const Eigen::MatrixXd *ctr : modal) {
        if (ctr->size() == 0) continue;
        x.resize(static_cast<std::size_t>(ctr->cols()));
        for (Eigen::Index d = 0; d < ctr->cols(); ++d)
          x[static_cast<std::size_t>(d)] = (*ctr)(g_true, d) + normal(rng);
        for (int c = 0; c < C; ++c) {
          const int g = cfg.emission_groups[static_cast<std::size_t>(c)];
          double d2 = 0.0;
          for (Eigen::Index d = 0; d < ctr->cols(); ++d) {
            const double diff = x[static_cast<std::size_t>(d)] - (*ctr)(g, d);
            d2 += diff * diff;
          }
          ll[static_cast<std::size_t>(c)] -= 0.5 * d2;
        }
      }
      if (use_avd) {
        const int p = slot == 0 ? prev / C : prev % C;
        const auto &mp = cfg.avd_means[static_cast<std::size_t>(p)];
        const auto &mc = cfg.avd_means[static_cast<std::size_t>(lab[slot])];
        std::array<double, 3> a{};
        for (int d = 0; d < 3; ++d)
          a[d] = std::clamp((1.0 - cfg.avd_lead) * mp[d] + cfg.avd_lead * mc[d] +
                                cfg.avd_noise * normal(rng),
                            1.0, 5.0);
        for (int c = 0; c < C; ++c) {
          const auto &m = cfg.avd_means[static_cast<std::size_t>(c)];
          double d2 = 0.0;
          for (int d = 0; d < 3; ++d) {
            const double diff = a[d] - ((1.0 - cfg.avd_lead) * mp[d] + cfg.avd_lead * m[d]);
            d2 += diff * diff;
          }
          ll[static_cast<std::size_t>(c)] -= 0.5 * d2 / var;
        }
      }
    }

    double top = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < S; ++s) {
      post(s) = prior(s) > 0.0 ? std::log(prior(s)) + loglik[0][static_cast<std::size_t>(s / C)] +
                                     loglik[1][static_cast<std::size_t>(s % C)]
                               : -std::numeric_limits<double>::infinity();
      top = std::max(top, post(s));
    }
    for (int s = 0; s < S; ++s) post(s) = std::exp(post(s) - top);
    post /= post.sum();
    for (int h = 0; h <= k; ++h) {
      const double v = slot_max_average(post * Mh[static_cast<std::size_t>(h)], C);
      sum[static_cast<std::size_t>(h)] += v;
      sum_sq[static_cast<std::size_t>(h)] += v * v;
    }
  }

  std::vector<OracleResult> out;
  const auto n = static_cast<double>(trials);
  for (int h = 0; h <= k; ++h) {
    const double mean = sum[static_cast<std::size_t>(h)] / n;
    const double var_h = std::max(0.0, sum_sq[static_cast<std::size_t>(h)] / n - mean * mean);
    out.push_back({mean, std::sqrt(var_h / std::max(1.0, n - 1.0)), false});
  }
  return out;
}

}  // namespace

std::vector<OracleResult> oracle_by_horizon(const SynthConfig &cfg, int k,
                                            Conditioning conditioning, std::uint64_t trials,
                                            std::uint64_t seed) {
  cfg.validate();
  if (k < 0) throw UsageError("horizon must be >= 0");
  if (conditioning == Conditioning::kCurrentLabelsOnly) return exact_labels_only(cfg, k);
  if (trials == 0) throw UsageError("Monte Carlo oracle needs at least one trial");
  return monte_carlo(cfg, k, conditioning, trials, seed);
}

OracleResult bayes_oracle(const SynthConfig &cfg, int h, Conditioning conditioning,
                          std::uint64_t trials, std::uint64_t seed) {
  return oracle_by_horizon(cfg, h, conditioning, trials, seed).back();
}

}  // namespace emo
