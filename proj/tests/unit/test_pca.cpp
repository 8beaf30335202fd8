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

#include <doctest.h>

#include "erfc/error.hpp"
#include "erfc/pca.hpp"
#include "erfc/seeding.hpp"
#include "test_support.hpp"

using namespace emo;
using emo::testing::brute_covariance;
using emo::testing::jacobi_eigen;
using emo::testing::max_principal_angle;

namespace {

Eigen::MatrixXd random_matrix(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd X(n, d);
  // Unequal column scales keep the spectrum well separated.
  for (int j = 0; j < d; ++j) {
    const double scale = 1.0 + 0.7 * j;
    for (int i = 0; i < n; ++i) X(i, j) = scale * g(rng) + 0.3 * j;
  }
  return X;
}

}  // namespace

TEST_SUITE("pca") {
  TEST_CASE("matches a Jacobi eigendecomposition of the covariance") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const int n = 13 + static_cast<int>(seed % 8);  // 13..20
      const int d = 3 + static_cast<int>(seed % 10);  // 3..12
      const auto X = random_matrix(n, d, seed);
      const auto ref = jacobi_eigen(brute_covariance(X));
      const int c = std::max(1, d / 2);
      const auto m = fit_pca(X, c);
      Eigen::MatrixXd basis(c, d);
      for (int i = 0; i < c; ++i)
        for (int j = 0; j < d; ++j) basis(i, j) = ref.vectors[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      CAPTURE(seed);
      CHECK(max_principal_angle(basis, m.components) < 1e-6);
      for (int i = 0; i < c; ++i) CHECK(std::abs(m.explained_variance[i] - ref.values[static_cast<std::size_t>(i)]) < 1e-9);
      double trace = 0.0;
      for (double v : ref.values) trace += v;
      CHECK(std::abs(m.total_variance - trace) < 1e-9);
      CHECK((m.components * m.components.transpose() - Eigen::MatrixXd::Identity(c, c)).norm() < 1e-10);
    }
  }

  TEST_CASE("wide matrices take the Gram route and still agree") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto X = random_matrix(8, 12, 100 + seed);
      const auto ref = jacobi_eigen(brute_covariance(X));
      const int c = 5;
      const auto m = fit_pca(X, c);
      Eigen::MatrixXd basis(c, 12);
      for (int i = 0; i < c; ++i)
        for (int j = 0; j < 12; ++j) basis(i, j) = ref.vectors[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      CHECK(max_principal_angle(basis, m.components) < 1e-6);
      for (int i = 0; i < c; ++i) CHECK(std::abs(m.explained_variance[i] - ref.values[static_cast<std::size_t>(i)]) < 1e-9);
    }
  }

  TEST_CASE("planted low rank is recovered exactly") {
    Rng rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int rank : {1, 2, 3}) {
      Eigen::MatrixXd B(rank, 12), Z(20, rank);
      for (int i = 0; i < B.size(); ++i) B.data()[i] = g(rng);
      for (int i = 0; i < Z.size(); ++i) Z.data()[i] = g(rng);
      const Eigen::MatrixXd X = Z * B;
      const auto m = fit_pca(X, rank + 2);
      for (int i = rank; i < rank + 2; ++i) CHECK(m.explained_variance[i] < 1e-10 * m.explained_variance[0]);
      for (int i = 0; i < rank; ++i) CHECK(m.explained_variance[i] > 1e-3);
      // Top components span the row space of B.
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(B.transpose());
      const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(12, rank);
      CHECK(max_principal_angle(Q.transpose(), m.components.topRows(rank)) < 1e-6);
      // Projection reconstructs the data.
      for (int r = 0; r < 20; ++r) {
        Eigen::VectorXd row = X.row(r).transpose();
        Eigen::VectorXd y = transform_pca(m, {row.data(), 12});
        Eigen::VectorXd back = m.components.transpose() * y + m.mean;
        CHECK((back - row).norm() < 1e-8);
      }
    }
  }

  TEST_CASE("explained variance is non-increasing and train projection keeps it") {
    const auto X = random_matrix(20, 10, 77);
    const auto m = fit_pca(X, 6);
    Eigen::MatrixXd Y(20, 6);
    for (int r = 0; r < 20; ++r) {
      Eigen::VectorXd row = X.row(r).transpose();
      Y.row(r) = transform_pca(m, {row.data(), 10}).transpose();
    }
    for (int i = 0; i < 6; ++i) {
      if (i > 0) CHECK(m.explained_variance[i] <= m.explained_variance[i - 1]);
      const double var = (Y.col(i).array() - Y.col(i).mean()).square().sum() / 19.0;
      CHECK(std::abs(var - m.explained_variance[i]) < 1e-9);
    }
  }

  TEST_CASE("argument checks") {
    const auto X = random_matrix(5, 3, 1);
    CHECK_THROWS_AS(fit_pca(X, 0), UsageError);
    CHECK_THROWS_AS(fit_pca(X, 4), UsageError);
    CHECK_THROWS_AS(fit_pca(X.topRows(1), 1), UsageError);
    Eigen::MatrixXd bad = X;
    bad(2, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(fit_pca(bad, 2), ValidationError);
    const auto m = fit_pca(X, 2);
    std::vector<double> wrong(4, 0.0);
    CHECK_THROWS_AS(transform_pca(m, wrong), ValidationError);
  }

  TEST_CASE("JSON round-trip and store transform") {
    auto m = fit_pca(random_matrix(12, 6, 3), 3);
    m.fit_ids = {"Ses01_a", "Ses02_b"};
    const auto back = pca_from_json(pca_to_json(m));
    CHECK(back.fit_ids == m.fit_ids);
    CHECK(back.components == m.components);
    CHECK(back.mean == m.mean);
    CHECK(back.explained_variance == m.explained_variance);
    CHECK(back.total_variance == m.total_variance);
    CHECK_THROWS_AS(pca_from_json(nlohmann::json{{"format", "x"}}), ValidationError);

    FeatureStore s(Modality::kAudio, 6);
    std::vector<double> v(6, 1.0);
    s.insert({"Ses01_a", 0, 0}, v);
    s.insert({"Ses03_c", 1, 1}, v);
    const auto t = transform_store(m, s);
    CHECK(t.dim() == 3);
    CHECK(t.keys() == s.keys());
    CHECK(gather_rows(s, {"Ses03_c"}).rows() == 1);
  }
}
