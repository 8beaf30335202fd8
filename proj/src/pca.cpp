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

#include "erfc/pca.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "erfc/error.hpp"

namespace emo {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void fix_sign(Eigen::Ref<VectorXd> v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v[arg] < 0.0) v = -v;
}

// Orthogonalizes v against the first `rows` rows of basis (twice, modified
// Gram-Schmidt). Returns the residual norm before normalization.
double orthogonalize(const MatrixXd &basis, Eigen::Index rows, VectorXd &v) {
  for (int pass = 0; pass < 2; ++pass)
    for (Eigen::Index r = 0; r < rows; ++r) v -= basis.row(r).dot(v) * basis.row(r).transpose();
  return v.norm();
}

}  // namespace

PcaModel fit_pca(const MatrixXd &X, int n_components, std::uint64_t /*seed*/) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (n < 2)
    throw UsageError(fmt::format("PCA needs at least 2 rows, got {}", n));
  if (n_components < 1 || n_components > std::min<Eigen::Index>(n - 1, d))
    throw UsageError(fmt::format("n_components={} out of range [1, min(N-1={}, D={})]",
                                 n_components, n - 1, d));
  if (!X.allFinite())
    throw ValidationError(ErrorKind::kNonFinite, "PCA input contains non-finite values");

  PcaModel model;
  model.mean = X.colwise().mean().transpose();
  const MatrixXd centered = X.rowwise() - model.mean.transpose();
  const double denom = static_cast<double>(n - 1);
  model.total_variance = centered.squaredNorm() / denom;
  model.components.resize(n_components, d);
  model.explained_variance.resize(n_components);

  if (d <= n) {
    const MatrixXd cov = (centered.transpose() * centered) / denom;
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
      throw ValidationError(ErrorKind::kNonFinite, "covariance eigendecomposition failed");
    for (int c = 0; c < n_components; ++c) {
      const Eigen::Index src = d - 1 - c;
      model.explained_variance[c] = std::max(0.0, solver.eigenvalues()[src]);
      model.components.row(c) = solver.eigenvectors().col(src).transpose();
    }
  } else {
    // Nonzero spectrum of X^T X equals that of X X^T; lift the Gram
    // eigenvectors back to feature space.
    const MatrixXd gram = (centered * centered.transpose()) / denom;
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success)
      throw ValidationError(ErrorKind::kNonFinite, "Gram eigendecomposition failed");
    const double top = std::max(solver.eigenvalues()[n - 1], 0.0);
    Eigen::Index next_basis = 0;
    for (int c = 0; c < n_components; ++c) {
      const Eigen::Index src = n - 1 - c;
      const double lambda = std::max(0.0, solver.eigenvalues()[src]);
      model.explained_variance[c] = lambda;
      VectorXd v = VectorXd::Zero(d);
      double norm = 0.0;
      if (lambda > 1e-12 * top && lambda > 0.0) {
        v = centered.transpose() * solver.eigenvectors().col(src);
        norm = orthogonalize(model.components, c, v);
      }
      // Null-space directions are arbitrary; complete with coordinate axes.
      while (norm < 1e-8 && next_basis < d) {
        v = VectorXd::Unit(d, next_basis++);
        norm = orthogonalize(model.components, c, v);
      }
      model.components.row(c) = (v / norm).transpose();
    }
  }
  for (int c = 0; c < n_components; ++c) {
    VectorXd row = model.components.row(c).transpose();
    fix_sign(row);
    model.components.row(c) = row.transpose();
  }
  return model;
}

VectorXd transform_pca(const PcaModel &model, std::span<const double> x) {
  if (static_cast<Eigen::Index>(x.size()) != model.mean.size())
    throw ValidationError(ErrorKind::kDimensionMismatch,
                          fmt::format("PCA input has dimension {}, model expects {}",
                                      x.size(), model.mean.size()));
  Eigen::Map<const VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  return model.components * (v - model.mean);
}

FeatureStore transform_store(const PcaModel &model, const FeatureStore &store) {
  FeatureStore out(store.modality(), static_cast<std::size_t>(model.n_components()));
  for (const auto &key : store.keys()) {
    VectorXd y = transform_pca(model, *store.find(key));
    out.insert(key, std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
  }
  return out;
}

MatrixXd gather_rows(const FeatureStore &store, const std::set<std::string> &conv_ids) {
  std::vector<FeatureKey> keys;
  for (const auto &key : store.keys())
    if (conv_ids.count(key.conv_id)) keys.push_back(key);
  MatrixXd X(static_cast<Eigen::Index>(keys.size()), static_cast<Eigen::Index>(store.dim()));
  for (std::size_t i = 0; i < keys.size(); ++i) {
    auto row = *store.find(keys[i]);
    for (std::size_t j = 0; j < row.size(); ++j)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return X;
}

nlohmann::json pca_to_json(const PcaModel &model) {
  nlohmann::json j;
  j["format"] = "erfc-pca/1";
  j["mean"] = std::vector<double>(model.mean.data(), model.mean.data() + model.mean.size());
  j["explained_variance"] =
      std::vector<double>(model.explained_variance.data(),
                          model.explained_variance.data() + model.explained_variance.size());
  j["total_variance"] = model.total_variance;
  auto &rows = j["components"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < model.components.rows(); ++r) {
    VectorXd row = model.components.row(r).transpose();
    rows.push_back(std::vector<double>(row.data(), row.data() + row.size()));
  }
  j["fit_ids"] = model.fit_ids;
  return j;
}

PcaModel pca_from_json(const nlohmann::json &j) {
  if (j.value("format", "") != "erfc-pca/1")
    throw ValidationError(ErrorKind::kBadModel, "not an erfc-pca/1 document");
  PcaModel m;
  auto mean = j.at("mean").get<std::vector<double>>();
  m.mean = Eigen::Map<VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  auto ev = j.at("explained_variance").get<std::vector<double>>();
  m.explained_variance = Eigen::Map<VectorXd>(ev.data(), static_cast<Eigen::Index>(ev.size()));
  m.total_variance = j.at("total_variance").get<double>();
  const auto &rows = j.at("components");
  m.components.resize(static_cast<Eigen::Index>(rows.size()), m.mean.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto row = rows[r].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != m.mean.size())
      throw ValidationError(ErrorKind::kBadModel, "PCA component has wrong dimension");
    for (std::size_t c = 0; c < row.size(); ++c)
      m.components(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  m.fit_ids = j.at("fit_ids").get<std::vector<std::string>>();
  return m;
}

void save_pca(const std::filesystem::path &path, const PcaModel &model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError(ErrorKind::kIo, "cannot write " + path.string());
  out << pca_to_json(model).dump() << '\n';
}

PcaModel load_pca(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return pca_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception &e) {
    throw ValidationError(ErrorKind::kBadModel,
                          fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace emo
