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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "erfc/corpus.hpp"

namespace emo {

struct PcaModel {
  Eigen::VectorXd mean;                // D
  Eigen::MatrixXd components;          // n_components x D, orthonormal rows
  Eigen::VectorXd explained_variance;  // non-increasing
  double total_variance = 0.0;         // trace of the sample covariance
  // Conversations whose rows the model was fit on. Used to prove that no
  // test conversation influenced the projection.
  std::vector<std::string> fit_ids;

  int input_dim() const { return static_cast<int>(mean.size()); }
  int n_components() const { return static_cast<int>(components.rows()); }
};

// Principal components of the rows of X (sample covariance, N-1 denominator).
// Uses the D x D covariance when D <= N and the N x N Gram matrix otherwise,
// which keeps 6373-dimensional audio tractable. Each component is signed so
// its largest-magnitude entry is positive. The solver is exact, so `seed` has
// no effect on the result; it is accepted so every fitting stage shares one
// signature.
PcaModel fit_pca(const Eigen::MatrixXd &X, int n_components, std::uint64_t seed = 0);

Eigen::VectorXd transform_pca(const PcaModel &model, std::span<const double> x);

// Applies the projection to every vector in a store.
FeatureStore transform_store(const PcaModel &model, const FeatureStore &store);

// Rows of `store` belonging to the listed conversations, as an N x D matrix.
Eigen::MatrixXd gather_rows(const FeatureStore &store,
                            const std::set<std::string> &conv_ids);

nlohmann::json pca_to_json(const PcaModel &model);
PcaModel pca_from_json(const nlohmann::json &j);
void save_pca(const std::filesystem::path &path, const PcaModel &model);
PcaModel load_pca(const std::filesystem::path &path);

}  // namespace emo
