// Copyright 2026 The s3nmf Authors
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

#include "s3nmf/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace s3nmf {
namespace {

constexpr double kScaleFloor = 1e-12;

Matrix pairwise_distances(const Matrix& x) {
  const Index n = x.rows();
  Matrix d = Matrix::Zero(n, n);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double dist = (x.row(i) - x.row(j)).norm();
      d(i, j) = dist;
      d(j, i) = dist;
    }
  }
  return d;
}

std::vector<std::vector<Index>> knn_from_distances(const Matrix& dist, int k) {
  const Index n = dist.rows();
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(n));
  std::vector<Index> order(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    Index pos = 0;
    for (Index j = 0; j < n; ++j) {
      if (j != i) order[static_cast<std::size_t>(pos++)] = j;
    }
    auto closer = [&](Index a, Index b) {
      if (dist(i, a) != dist(i, b)) return dist(i, a) < dist(i, b);
      return a < b;
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), closer);
    out[static_cast<std::size_t>(i)].assign(order.begin(), order.begin() + k);
  }
  return out;
}

int resolve_k(Index n, int k) {
  if (k == 0) return auto_k(n);
  if (k < 0 || k >= n) {
    throw ParameterError("k=" + std::to_string(k) + " must satisfy 0 < k < n=" + std::to_string(n));
  }
  return k;
}

}  // namespace

int auto_k(Index n) {
  if (n < 2) throw ParameterError("auto_k needs n >= 2");
  const int k = static_cast<int>(std::floor(std::log2(static_cast<double>(n)))) + 1;
  return std::clamp(k, 1, static_cast<int>(n - 1));
}

std::vector<std::vector<Index>> nearest_neighbors(const DataMatrix& data, int k) {
  const int kk = resolve_k(data.samples(), k);
  return knn_from_distances(pairwise_distances(data.values()), kk);
}

AffinityMatrix build_affinity(const DataMatrix& data, const AffinityConfig& config) {
  const Index n = data.samples();
  const int k = resolve_k(n, config.k);
  const Matrix dist = pairwise_distances(data.values());
  const auto knn = knn_from_distances(dist, k);

  // Local scale: distance to the k-th neighbour.
  Vector sigma(n);
  for (Index i = 0; i < n; ++i) {
    sigma(i) = std::max(dist(i, knn[static_cast<std::size_t>(i)].back()), kScaleFloor);
  }

  Matrix directed = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j : knn[static_cast<std::size_t>(i)]) {
      double w = 1.0;
      if (config.kernel == Kernel::kSelfTuningGaussian) {
        const double d = dist(i, j);
        w = std::exp(-(d * d) / (sigma(i) * sigma(j)));
      }
      directed(i, j) = w;
    }
  }

  Matrix w(n, n);
  for (Index i = 0; i < n; ++i) {
    w(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) {
      const double a = directed(i, j);
      const double b = directed(j, i);
      const double v = config.symmetrize == Symmetrization::kUnion ? std::max(a, b) : 0.5 * (a + b);
      w(i, j) = v;
      w(j, i) = v;
    }
  }

  if (config.normalization == Normalization::kSymmetric) {
    Vector inv_sqrt_degree(n);
    for (Index i = 0; i < n; ++i) {
      const double deg = w.row(i).sum();
      inv_sqrt_degree(i) = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
    }
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        const double v = w(i, j) * inv_sqrt_degree(i) * inv_sqrt_degree(j);
        w(i, j) = v;
        w(j, i) = v;
      }
    }
  }
  return AffinityMatrix(std::move(w));
}

std::string_view to_string(Kernel kernel) {
  return kernel == Kernel::kBinary ? "binary" : "selftuning";
}

std::string_view to_string(Symmetrization symmetrize) {
  return symmetrize == Symmetrization::kUnion ? "union" : "average";
}

std::string_view to_string(Normalization normalization) {
  return normalization == Normalization::kNone ? "none" : "symmetric";
}

Kernel parse_kernel(std::string_view name) {
  if (name == "binary") return Kernel::kBinary;
  if (name == "selftuning") return Kernel::kSelfTuningGaussian;
  throw ParameterError("unknown kernel '" + std::string(name) + "'");
}

Symmetrization parse_symmetrization(std::string_view name) {
  if (name == "union") return Symmetrization::kUnion;
  if (name == "average") return Symmetrization::kAverage;
  throw ParameterError("unknown symmetrization '" + std::string(name) + "'");
}

Normalization parse_normalization(std::string_view name) {
  if (name == "none") return Normalization::kNone;
  if (name == "symmetric") return Normalization::kSymmetric;
  throw ParameterError("unknown normalization '" + std::string(name) + "'");
}

}  // namespace s3nmf
