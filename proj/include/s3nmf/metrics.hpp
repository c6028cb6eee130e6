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

#ifndef S3NMF_METRICS_HPP_
#define S3NMF_METRICS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "s3nmf/core.hpp"

namespace s3nmf {

/// Clustering agreement scores. All lie in [0, 1] except ari, in [-1, 1].
struct MetricReport {
  double acc = 0.0;
  double nmi = 0.0;
  double pur = 0.0;
  double ari = 0.0;
  double f1 = 0.0;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

/// Per-member scores of an ensemble against ground truth, with the mean and
/// sample standard deviation over members.
struct EnsembleReport {
  std::vector<MetricReport> members;
  MetricReport mean;
  MetricReport std;
};

/// Rows index pred clusters, columns truth clusters.
std::vector<std::vector<std::int64_t>> contingency(const Partition& pred, const Partition& truth);

/// Mutual information over the arithmetic mean of the entropies (natural log).
double nmi(const Partition& p, const Partition& q);

/// Mean NMI over the b(b-1)/2 unordered pairs.
double anmi(std::span<const Partition> partitions);

double acc(const Partition& pred, const Partition& truth);
double purity(const Partition& pred, const Partition& truth);
double ari(const Partition& pred, const Partition& truth);

/// Pairwise co-clustering F1.
double f1(const Partition& pred, const Partition& truth);

MetricReport evaluate(const Partition& pred, const Partition& truth);
EnsembleReport evaluate_ensemble(std::span<const Partition> members, const Partition& truth);

/// Mean and sample standard deviation of already computed member scores.
EnsembleReport summarize(std::vector<MetricReport> members);

/// Maximum-weight perfect matching on a square matrix (Hungarian method).
/// Returns, for each row, the assigned column.
std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weight);

struct OracleSuiteReport {
  int cases = 0;
  int mismatches = 0;
  std::string first_failure;
};

namespace oracle {

/// Exhaustive search over injective cluster-to-class matchings.
double acc_brute_force(const Partition& pred, const Partition& truth);

/// Random labelings with up to max_clusters clusters each; compares the
/// assignment-based acc against acc_brute_force exactly.
OracleSuiteReport run_acc_suite(int cases, int max_clusters, std::uint64_t seed);

}  // namespace oracle

}  // namespace s3nmf

#endif  // S3NMF_METRICS_HPP_
