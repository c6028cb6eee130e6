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

#ifndef S3NMF_PIPELINE_HPP_
#define S3NMF_PIPELINE_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "s3nmf/core.hpp"
#include "s3nmf/solver.hpp"

namespace s3nmf {

// kHard: co-association reconstruction with learned weights.
// kSoft: S = sum_m a_m V_m V_m^T.
// kUnweighted: co-association reconstruction, weights pinned to 1/b.
enum class Mode { kHard, kSoft, kUnweighted };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view name);

struct PipelineConfig {
  int b = 20;
  int c = 0;
  // Copied into solver.tau by run().
  double tau = 2.0;
  int max_outer_iters = 10;
  Mode mode = Mode::kHard;
  std::uint64_t seed = 0;
  SolverConfig solver;
};

void validate(const PipelineConfig& config, Index n);

/// What happened in one outer iteration.
struct OuterIteration {
  double anmi = 0.0;
  int inner_iterations = 0;
  bool converged = false;
  double final_objective = 0.0;
  std::string affinity_digest;  // of the S fed to this iteration's solve
  int zero_rows = 0;            // all-zero factor rows hardened to label 0
  double wall_seconds = 0.0;
  std::vector<Partition> partitions;
  WeightVector weights = WeightVector::uniform(1);
};

struct PipelineResult {
  std::vector<Partition> partitions;  // from the selected iteration
  WeightVector weights = WeightVector::uniform(1);
  Partition best_partition = Partition({}, 1);  // member with the largest weight
  std::vector<double> anmi_trace;
  int selected_iteration = 0;
  std::vector<std::string> affinity_trace_digest;
  // The S used as input to the selected iteration's inner solve.
  std::optional<AffinityMatrix> selected_affinity;
  std::vector<OuterIteration> iterations;
};

/// Row-wise argmax; ties and all-zero rows go to the lowest column.
Partition harden(const Factor& factor, int* zero_rows = nullptr);

/// S_ij = sum_m a_m [label_m(i) == label_m(j)].
AffinityMatrix reconstruct_affinity(std::span<const Partition> partitions,
                                    const WeightVector& weights);

/// S = sum_m a_m V_m V_m^T.
AffinityMatrix reconstruct_affinity_soft(std::span<const Factor> factors,
                                         const WeightVector& weights);

/// Seed of the random factors drawn at a given outer iteration.
std::uint64_t iteration_seed(std::uint64_t seed, int iteration);

/// Hex FNV-1a digest of the raw matrix bytes.
std::string digest(const Matrix& m);

/// The outer self-supervision loop. Stops the first time ANMI falls strictly
/// below its running maximum and returns the outputs of the earliest
/// iteration attaining that maximum.
PipelineResult run(const AffinityMatrix& affinity_init, const PipelineConfig& config);

}  // namespace s3nmf

#endif  // S3NMF_PIPELINE_HPP_
