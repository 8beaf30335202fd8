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

#include "erfc/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "erfc/error.hpp"
#include "erfc/seeding.hpp"

namespace emo {

BinnedMatrix::BinnedMatrix(const Eigen::MatrixXd &X, int max_bins)
    : rows_(static_cast<int>(X.rows())), cols_(static_cast<int>(X.cols())) {
  max_bins = std::clamp(max_bins, 2, 255);
  cuts_.resize(static_cast<std::size_t>(cols_));
  bins_.resize(static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_));
  std::vector<double> sorted(static_cast<std::size_t>(rows_));
  for (int f = 0; f < cols_; ++f) {
    for (int r = 0; r < rows_; ++r) sorted[static_cast<std::size_t>(r)] = X(r, f);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> uniq(sorted.begin(), sorted.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

    auto &cuts = cuts_[static_cast<std::size_t>(f)];
    if (static_cast<int>(uniq.size()) <= max_bins) {
      for (std::size_t i = 0; i + 1 < uniq.size(); ++i)
        cuts.push_back(uniq[i] + (uniq[i + 1] - uniq[i]) / 2.0);
    } else {
      for (int q = 1; q < max_bins; ++q) {
        const double a = sorted[static_cast<std::size_t>(q) * sorted.size() /
                                static_cast<std::size_t>(max_bins)];
        auto next = std::upper_bound(uniq.begin(), uniq.end(), a);
        if (next == uniq.end()) continue;
        const double cut = a + (*next - a) / 2.0;
        if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
      }
    }
    std::uint8_t *col = bins_.data() + static_cast<std::size_t>(f) * static_cast<std::size_t>(rows_);
    for (int r = 0; r < rows_; ++r)
      col[r] = static_cast<std::uint8_t>(
          std::lower_bound(cuts.begin(), cuts.end(), X(r, f)) - cuts.begin());
  }
}

namespace {

// Quantile bins per feature for split search.
constexpr int kForestBins = 32;
// Below this many rows a sorted scan beats filling a histogram.
constexpr int kSmallNode = 24;

class TreeGrower {
 public:
  TreeGrower(const BinnedMatrix &bins, std::span<const int> y, int n_classes, int max_depth,
             std::uint64_t seed)
      : bins_(bins), y_(y), n_classes_(n_classes), max_depth_(max_depth), rng_(seed) {
    const int p = bins.cols();
    mtry_ = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(p)))));
    features_.resize(static_cast<std::size_t>(p));
    std::iota(features_.begin(), features_.end(), 0);
    counts_.resize(static_cast<std::size_t>(n_classes));
    left_.resize(static_cast<std::size_t>(n_classes));
    hist_.resize(256 * static_cast<std::size_t>(n_classes));
  }

  RandomForest::Tree grow() {
    const int n = bins_.rows();
    std::uniform_int_distribution<int> pick(0, n - 1);
    rows_.resize(static_cast<std::size_t>(n));
    for (auto &r : rows_) r = pick(rng_);
    build(0, n, 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    int bin = 0;
    double score = 0.0;
  };

  int new_node() {
    tree_.feature.push_back(-1);
    tree_.threshold.push_back(0.0);
    tree_.left.push_back(-1);
    tree_.right.push_back(-1);
    tree_.leaf.push_back(-1);
    return static_cast<int>(tree_.feature.size()) - 1;
  }

  void make_leaf(int node, int n) {
    tree_.leaf[static_cast<std::size_t>(node)] = static_cast<int>(tree_.probs.size());
    for (int c = 0; c < n_classes_; ++c)
      tree_.probs.push_back(n > 0 ? counts_[static_cast<std::size_t>(c)] / static_cast<double>(n)
                                  : 1.0 / n_classes_);
  }

  // Sum over both children of sum_c count_c^2 / n_child; larger is purer.
  double score(const std::vector<double> &left, int n_left, int n) const {
    double sl = 0.0, sr = 0.0;
    for (int c = 0; c < n_classes_; ++c) {
      const double l = left[static_cast<std::size_t>(c)];
      const double r = counts_[static_cast<std::size_t>(c)] - l;
      sl += l * l;
      sr += r * r;
    }
    return sl / n_left + sr / (n - n_left);
  }

  // Returns false when the feature is constant over the node.
  bool evaluate(int f, int begin, int end, Split &best) {
    const std::uint8_t *col = bins_.column(f);
    const int n = end - begin;
    if (n < kSmallNode) {
      // key = bin * C + label sorts by bin and keeps the label recoverable.
      const auto C = static_cast<std::uint32_t>(n_classes_);
      keys_.resize(static_cast<std::size_t>(n));
      for (int i = begin; i < end; ++i) {
        const int r = rows_[static_cast<std::size_t>(i)];
        std::uint32_t key = col[r] * C + static_cast<std::uint32_t>(y_[static_cast<std::size_t>(r)]);
        std::size_t j = static_cast<std::size_t>(i - begin);
        for (; j > 0 && keys_[j - 1] > key; --j) keys_[j] = keys_[j - 1];
        keys_[j] = key;
      }
      if (keys_.front() / C == keys_.back() / C) return false;
      std::fill(left_.begin(), left_.end(), 0.0);
      for (std::size_t i = 0; i + 1 < keys_.size(); ++i) {
        left_[keys_[i] % C] += 1.0;
        const auto b = keys_[i] / C;
        if (keys_[i + 1] / C == b) continue;
        const double s = score(left_, static_cast<int>(i + 1), n);
        if (s > best.score) best = {f, static_cast<int>(b), s};
      }
      return true;
    }
    const int nb = bins_.n_bins(f);
    const std::size_t C = static_cast<std::size_t>(n_classes_);
    std::fill(hist_.begin(), hist_.begin() + static_cast<std::ptrdiff_t>(nb * C), 0);
    int lo = 255, hi = 0;
    for (int i = begin; i < end; ++i) {
      const int r = rows_[static_cast<std::size_t>(i)];
      const int b = col[r];
      lo = std::min(lo, b);
      hi = std::max(hi, b);
      ++hist_[static_cast<std::size_t>(b) * C + static_cast<std::size_t>(y_[static_cast<std::size_t>(r)])];
    }
    if (lo == hi) return false;
    std::fill(left_.begin(), left_.end(), 0.0);
    int n_left = 0;
    for (int b = lo; b < hi; ++b) {
      const int *h = hist_.data() + static_cast<std::size_t>(b) * C;
      int added = 0;
      for (std::size_t c = 0; c < C; ++c) {
        left_[c] += h[c];
        added += h[c];
      }
      if (added == 0) continue;
      n_left += added;
      const double s = score(left_, n_left, n);
      if (s > best.score) best = {f, b, s};
    }
    return true;
  }

  int build(int begin, int end, int depth) {
    const int node = new_node();
    tree_.depth = std::max(tree_.depth, depth);
    const int n = end - begin;
    std::fill(counts_.begin(), counts_.end(), 0.0);
    for (int i = begin; i < end; ++i)
      counts_[static_cast<std::size_t>(y_[static_cast<std::size_t>(rows_[static_cast<std::size_t>(i)])])] += 1.0;
    int distinct = 0;
    double parent = 0.0;
    for (double c : counts_) {
      distinct += c > 0.0;
      parent += c * c;
    }
    if (depth >= max_depth_ || n < 2 || distinct <= 1) {
      make_leaf(node, n);
      return node;
    }
    parent /= n;

    Split best;
    best.score = parent * (1.0 + 1e-12);
    const int p = static_cast<int>(features_.size());
    int visited = 0;
    for (int i = 0; i < p && visited < mtry_; ++i) {
      std::uniform_int_distribution<int> pick(i, p - 1);
      std::swap(features_[static_cast<std::size_t>(i)], features_[static_cast<std::size_t>(pick(rng_))]);
      if (evaluate(features_[static_cast<std::size_t>(i)], begin, end, best)) ++visited;
    }
    if (best.feature < 0) {
      make_leaf(node, n);
      return node;
    }

    const std::uint8_t *col = bins_.column(best.feature);
    auto mid_it = std::partition(rows_.begin() + begin, rows_.begin() + end,
                                 [&](int r) { return col[r] <= best.bin; });
    const int mid = static_cast<int>(mid_it - rows_.begin());
    tree_.feature[static_cast<std::size_t>(node)] = best.feature;
    tree_.threshold[static_cast<std::size_t>(node)] =
        bins_.cuts(best.feature)[static_cast<std::size_t>(best.bin)];
    const int l = build(begin, mid, depth + 1);
    const int r = build(mid, end, depth + 1);
    tree_.left[static_cast<std::size_t>(node)] = l;
    tree_.right[static_cast<std::size_t>(node)] = r;
    return node;
  }

  const BinnedMatrix &bins_;
  std::span<const int> y_;
  int n_classes_;
  int max_depth_;
  int mtry_ = 1;
  Rng rng_;
  std::vector<int> rows_;
  std::vector<int> features_;
  std::vector<double> counts_;
  std::vector<double> left_;
  std::vector<int> hist_;
  std::vector<std::uint32_t> keys_;
  RandomForest::Tree tree_;
};

}  // namespace

void RandomForest::fit(const Eigen::MatrixXd &X, std::span<const int> y, int n_classes,
                       std::uint64_t seed) {
  if (static_cast<std::size_t>(X.rows()) != y.size())
    throw UsageError("random forest: X and y row counts differ");
  n_classes_ = n_classes;
  trees_.assign(static_cast<std::size_t>(n_trees_), Tree{});
  if (X.rows() == 0) {
    for (auto &t : trees_) {
      t.feature = {-1};
      t.threshold = {0.0};
      t.left = {-1};
      t.right = {-1};
      t.leaf = {0};
      t.probs.assign(static_cast<std::size_t>(n_classes), 1.0 / n_classes);
    }
    return;
  }
  const BinnedMatrix bins(X, kForestBins);
  parallel_for(trees_.size(), [&](std::size_t i) {
    TreeGrower grower(bins, y, n_classes, max_depth_, derive_seed(seed, {i}));
    trees_[i] = grower.grow();
  });
}

void RandomForest::predict_row(std::span<const double> x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto &t : trees_) {
    std::size_t node = 0;
    while (t.feature[node] >= 0)
      node = static_cast<std::size_t>(x[static_cast<std::size_t>(t.feature[node])] <= t.threshold[node]
                                          ? t.left[node]
                                          : t.right[node]);
    const double *p = t.probs.data() + t.leaf[node];
    for (int c = 0; c < n_classes_; ++c) out[static_cast<std::size_t>(c)] += p[c];
  }
  double sum = 0.0;
  for (double v : out) sum += v;
  for (double &v : out) v /= sum;
}

std::string RandomForest::id() const { return fmt::format("rf:{}:{}", n_trees_, max_depth_); }

int RandomForest::grown_depth() const {
  int d = 0;
  for (const auto &t : trees_) d = std::max(d, t.depth);
  return d;
}

nlohmann::json RandomForest::to_json() const {
  nlohmann::json j;
  j["type"] = "rf";
  j["n_trees"] = n_trees_;
  j["max_depth"] = max_depth_;
  j["n_classes"] = n_classes_;
  auto &trees = j["trees"] = nlohmann::json::array();
  for (const auto &t : trees_)
    trees.push_back({{"feature", t.feature}, {"threshold", t.threshold}, {"left", t.left},
                     {"right", t.right}, {"leaf", t.leaf}, {"probs", t.probs},
                     {"depth", t.depth}});
  return j;
}

std::unique_ptr<RandomForest> RandomForest::from_json(const nlohmann::json &j) {
  auto rf = std::make_unique<RandomForest>(j.at("n_trees").get<int>(), j.at("max_depth").get<int>());
  rf->n_classes_ = j.at("n_classes").get<int>();
  for (const auto &tj : j.at("trees")) {
    Tree t;
    t.feature = tj.at("feature").get<std::vector<int>>();
    t.threshold = tj.at("threshold").get<std::vector<double>>();
    t.left = tj.at("left").get<std::vector<int>>();
    t.right = tj.at("right").get<std::vector<int>>();
    t.leaf = tj.at("leaf").get<std::vector<int>>();
    t.probs = tj.at("probs").get<std::vector<double>>();
    t.depth = tj.at("depth").get<int>();
    rf->trees_.push_back(std::move(t));
  }
  if (static_cast<int>(rf->trees_.size()) != rf->n_trees_)
    throw ValidationError(ErrorKind::kBadModel, "random forest tree count mismatch");
  return rf;
}

}  // namespace emo
