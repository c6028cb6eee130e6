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

#include "s3nmf/core.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace s3nmf {
namespace {

std::string entry(Index i, Index j) {
  std::ostringstream os;
  os << "(" << i << "," << j << ")";
  return os.str();
}

}  // namespace

DataMatrix::DataMatrix(Matrix values, std::vector<std::string> row_ids)
    : values_(std::move(values)), row_ids_(std::move(row_ids)) {
  if (values_.rows() < 2) throw InputError("data matrix needs at least 2 samples");
  if (values_.cols() < 1) throw InputError("data matrix needs at least 1 feature");
  if (!row_ids_.empty() && static_cast<Index>(row_ids_.size()) != values_.rows()) {
    throw ShapeError("row id count does not match sample count");
  }
  for (Index i = 0; i < values_.rows(); ++i) {
    for (Index j = 0; j < values_.cols(); ++j) {
      if (!std::isfinite(values_(i, j))) {
        throw InputError("non-finite feature at " + entry(i, j));
      }
    }
  }
}

AffinityMatrix::AffinityMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() != values_.cols()) {
    throw ShapeError("affinity matrix must be square");
  }
  if (values_.rows() < 1) throw ShapeError("affinity matrix is empty");
  const Index n = values_.rows();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const double a = values_(i, j);
      const double b = values_(j, i);
      if (!std::isfinite(a) || !std::isfinite(b)) {
        throw ValidationError("non-finite affinity at " + entry(i, j));
      }
      if (a < 0.0 || b < 0.0) {
        throw ValidationError("negative affinity at " + (a < 0.0 ? entry(i, j) : entry(j, i)));
      }
      if (a != b) {
        throw ValidationError("asymmetric affinity at " + entry(i, j) + "/" + entry(j, i));
      }
    }
  }
}

Factor::Factor(Matrix values) : values_(std::move(values)) {
  if (values_.cols() < 1 || values_.cols() > values_.rows()) {
    throw ShapeError("factor must have 1 <= c <= n columns");
  }
  for (Index i = 0; i < values_.rows(); ++i) {
    for (Index j = 0; j < values_.cols(); ++j) {
      if (!(values_(i, j) >= 0.0) || !std::isfinite(values_(i, j))) {
        throw ValidationError("factor entry " + entry(i, j) + " is negative or non-finite");
      }
    }
  }
}

Partition::Partition(std::vector<int> labels, int clusters)
    : labels_(std::move(labels)), clusters_(clusters) {
  if (clusters_ < 1) throw ParameterError("partition needs at least one cluster");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || labels_[i] >= clusters_) {
      throw ValidationError("label " + std::to_string(labels_[i]) + " at sample " +
                            std::to_string(i) + " outside [0, " + std::to_string(clusters_) + ")");
    }
  }
}

Matrix Partition::one_hot() const {
  Matrix m = Matrix::Zero(static_cast<Index>(labels_.size()), clusters_);
  for (std::size_t i = 0; i < labels_.size(); ++i) m(static_cast<Index>(i), labels_[i]) = 1.0;
  return m;
}

WeightVector::WeightVector(Vector alpha) : alpha_(std::move(alpha)) {
  if (alpha_.size() < 1) throw ParameterError("weight vector is empty");
  double sum = 0.0;
  for (Index m = 0; m < alpha_.size(); ++m) {
    if (!(alpha_(m) > 0.0) || !std::isfinite(alpha_(m))) {
      throw ValidationError("weight " + std::to_string(m) + " is not strictly positive");
    }
    sum += alpha_(m);
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw ValidationError("weights do not sum to 1");
  }
}

WeightVector WeightVector::uniform(Index b) {
  if (b < 1) throw ParameterError("weight vector is empty");
  return WeightVector(Vector::Constant(b, 1.0 / static_cast<double>(b)));
}

double residual(const AffinityMatrix& affinity, const Factor& factor) {
  if (factor.samples() != affinity.size()) {
    throw ShapeError("factor has " + std::to_string(factor.samples()) +
                     " rows but affinity is " + std::to_string(affinity.size()) + " wide");
  }
  const Matrix& v = factor.values();
  return (affinity.values() - v * v.transpose()).squaredNorm();
}

double objective_from_residuals(std::span<const double> residuals,
                                const WeightVector& weights, double tau) {
  if (!(tau > 1.0)) throw ParameterError("tau must exceed 1");
  if (static_cast<Index>(residuals.size()) != weights.size()) {
    throw ShapeError("residual count does not match weight count");
  }
  double total = 0.0;
  for (std::size_t m = 0; m < residuals.size(); ++m) {
    total += std::pow(weights[static_cast<Index>(m)], tau) * residuals[m];
  }
  return total;
}

double objective(const AffinityMatrix& affinity, std::span<const Factor> factors,
                 const WeightVector& weights, double tau) {
  if (!(tau > 1.0)) throw ParameterError("tau must exceed 1");
  if (static_cast<Index>(factors.size()) != weights.size()) {
    throw ShapeError("factor count does not match weight count");
  }
  std::vector<double> h;
  h.reserve(factors.size());
  for (const Factor& f : factors) h.push_back(residual(affinity, f));
  return objective_from_residuals(h, weights, tau);
}

}  // namespace s3nmf
