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
#include <vector>

#include <Eigen/Dense>

#include "erfc/learners.hpp"

namespace emo {

// Column-wise quantile binning. A feature with at most `max_bins` distinct
// values keeps one bin per value, so integer-coded inputs split exactly.
// bin(v) is the number of cut points strictly below v, which makes
// "bin <= b" equivalent to "v <= cuts[b]".
class BinnedMatrix {
 public:
  BinnedMatrix(const Eigen::MatrixXd &X, int max_bins = 64);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const std::vector<double> &cuts(int feature) const { return cuts_[static_cast<std::size_t>(feature)]; }
  int n_bins(int feature) const { return static_cast<int>(cuts(feature).size()) + 1; }
  std::uint8_t bin(int row, int feature) const {
    return bins_[static_cast<std::size_t>(feature) * static_cast<std::size_t>(rows_) +
                 static_cast<std::size_t>(row)];
  }
  const std::uint8_t *column(int feature) const {
    return bins_.data() + static_cast<std::size_t>(feature) * static_cast<std::size_t>(rows_);
  }

 private:
  int rows_;
  int cols_;
  std::vector<std::vector<double>> cuts_;
  std::vector<std::uint8_t> bins_;
};

// Bagged CART classification trees (Gini, sqrt(p) candidate features per
// node, bootstrap rows). Tree i is grown from derive_seed(seed, {i}), so the
// forest is identical whether trees are grown serially or in parallel.
class RandomForest final : public BaseLearner {
 public:
  RandomForest(int n_trees = 100, int max_depth = 12) : n_trees_(n_trees), max_depth_(max_depth) {}

  void fit(const Eigen::MatrixXd &X, std::span<const int> y, int n_classes,
           std::uint64_t seed) override;
  void predict_row(std::span<const double> x, std::span<double> out) const override;
  std::string id() const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<RandomForest> from_json(const nlohmann::json &j);

  int n_trees() const { return n_trees_; }
  int max_depth() const { return max_depth_; }
  // Depth of the deepest grown tree (root = 0).
  int grown_depth() const;

  struct Tree {
    // Internal nodes have feature >= 0; leaves store an offset into probs.
    std::vector<int> feature;
    std::vector<double> threshold;
    std::vector<int> left;
    std::vector<int> right;
    std::vector<int> leaf;
    std::vector<double> probs;
    int depth = 0;
  };

 private:
  int n_trees_;
  int max_depth_;
  std::vector<Tree> trees_;
};

}  // namespace emo
