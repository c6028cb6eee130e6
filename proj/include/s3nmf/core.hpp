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

#ifndef S3NMF_CORE_HPP_
#define S3NMF_CORE_HPP_

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace s3nmf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error hierarchy. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

// Raised by validating constructors/loaders; names the first bad entry.
class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class CertificateError : public NumericError {
 public:
  using NumericError::NumericError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Sample-major feature matrix (n rows, d columns), all entries finite.
class DataMatrix {
 public:
  explicit DataMatrix(Matrix values, std::vector<std::string> row_ids = {});

  const Matrix& values() const { return values_; }
  const std::vector<std::string>& row_ids() const { return row_ids_; }
  Index samples() const { return values_.rows(); }
  Index features() const { return values_.cols(); }

 private:
  Matrix values_;
  std::vector<std::string> row_ids_;
};

/// Symmetric, nonnegative, finite n x n similarity matrix.
///
/// Symmetry is checked bit-exactly; producers mirror one triangle.
class AffinityMatrix {
 public:
  explicit AffinityMatrix(Matrix values);

  const Matrix& values() const { return values_; }
  Index size() const { return values_.rows(); }
  double operator()(Index i, Index j) const { return values_(i, j); }

 private:
  Matrix values_;
};

/// Nonnegative n x c factor.
class Factor {
 public:
  explicit Factor(Matrix values);

  const Matrix& values() const { return values_; }
  Index samples() const { return values_.rows(); }
  Index clusters() const { return values_.cols(); }

 private:
  Matrix values_;
};

/// Hard assignment of n samples to a fixed number of clusters. Clusters may
/// be empty.
class Partition {
 public:
  Partition(std::vector<int> labels, int clusters);

  const std::vector<int>& labels() const { return labels_; }
  int clusters() const { return clusters_; }
  std::size_t size() const { return labels_.size(); }
  int operator[](std::size_t i) const { return labels_[i]; }

  /// n x c one-hot membership matrix.
  Matrix one_hot() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<int> labels_;
  int clusters_;
};

/// Strictly positive weights on the simplex.
class WeightVector {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit WeightVector(Vector alpha);
  static WeightVector uniform(Index b);

  const Vector& values() const { return alpha_; }
  Index size() const { return alpha_.size(); }
  double operator[](Index m) const { return alpha_(m); }

 private:
  Vector alpha_;
};

/// One inner iteration of the alternating solver, recorded as the three
/// objective values of the interleaved descent argument:
/// O(V^t, a^t) >= O(V^{t+1}, a^t) >= O(V^{t+1}, a^{t+1}).
struct DescentStep {
  double before = 0.0;
  double after_factors = 0.0;
  double after_weights = 0.0;
};

struct EnsembleState {
  std::vector<Factor> factors;
  WeightVector weights = WeightVector::uniform(1);
  AffinityMatrix affinity = AffinityMatrix(Matrix::Zero(1, 1));
  std::vector<double> residuals;
  std::vector<double> anmi_history;
  // Entry 0 is the objective at the initial factors; entry t at iteration t.
  std::vector<double> objective_history;
  std::vector<DescentStep> descent;
  int iterations = 0;
  bool converged = false;
};

/// Squared Frobenius norm of S - V V^T.
double residual(const AffinityMatrix& affinity, const Factor& factor);

/// Sum over members of alpha_m^tau * residual(S, V_m).
double objective(const AffinityMatrix& affinity, std::span<const Factor> factors,
                 const WeightVector& weights, double tau);

/// Same, given precomputed residuals.
double objective_from_residuals(std::span<const double> residuals,
                                const WeightVector& weights, double tau);

}  // namespace s3nmf

#endif  // S3NMF_CORE_HPP_
