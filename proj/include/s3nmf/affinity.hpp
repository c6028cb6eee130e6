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

#ifndef S3NMF_AFFINITY_HPP_
#define S3NMF_AFFINITY_HPP_

#include <string_view>
#include <vector>

#include "s3nmf/core.hpp"

namespace s3nmf {

enum class Kernel { kBinary, kSelfTuningGaussian };
enum class Symmetrization { kUnion, kAverage };
enum class Normalization { kNone, kSymmetric };

struct AffinityConfig {
  int k = 0;  // 0 selects auto_k(n)
  Kernel kernel = Kernel::kSelfTuningGaussian;
  Symmetrization symmetrize = Symmetrization::kUnion;
  // kSymmetric rescales W to D^{-1/2} W D^{-1/2} after symmetrization.
  Normalization normalization = Normalization::kSymmetric;
};

/// floor(log2 n) + 1, clamped to [1, n - 1].
int auto_k(Index n);

/// Indices of the k nearest neighbours of every sample (self excluded),
/// ordered by (distance, index). Euclidean distance.
std::vector<std::vector<Index>> nearest_neighbors(const DataMatrix& data, int k);

/// kNN similarity graph with zero diagonal.
AffinityMatrix build_affinity(const DataMatrix& data, const AffinityConfig& config = {});

std::string_view to_string(Kernel kernel);
std::string_view to_string(Symmetrization symmetrize);
std::string_view to_string(Normalization normalization);
Kernel parse_kernel(std::string_view name);
Symmetrization parse_symmetrization(std::string_view name);
Normalization parse_normalization(std::string_view name);

}  // namespace s3nmf

#endif  // S3NMF_AFFINITY_HPP_
