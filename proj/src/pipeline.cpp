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

#include "s3nmf/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>

#include "s3nmf/metrics.hpp"

namespace s3nmf {
namespace {

void check_weights(std::size_t members, const WeightVector& weights) {
  if (members == 0) throw ShapeError("no ensemble members");
  if (static_cast<Index>(members) != weights.size()) {
    throw ShapeError("got " + std::to_string(members) + " members but " +
                     std::to_string(weights.size()) + " weights");
  }
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::kHard:
      return "hard";
    case Mode::kSoft:
      return "soft";
    case Mode::kUnweighted:
      return "unweighted";
  }
  return "hard";
}

Mode parse_mode(std::string_view name) {
  if (name == "hard") return Mode::kHard;
  if (name == "soft") return Mode::kSoft;
  if (name == "unweighted") return Mode::kUnweighted;
  throw ParameterError("unknown mode '" + std::string(name) + "'");
}

void validate(const PipelineConfig& config, Index n) {
  if (config.b < 2) throw ParameterError("ensemble size b must be at least 2");
  if (config.max_outer_iters < 1) throw ParameterError("max_outer_iters must be at least 1");
  if (config.c < 2 || config.c > n) {
    throw ParameterError("cluster count c=" + std::to_string(config.c) + " must lie in [2, n=" +
                         std::to_string(n) + "]");
  }
  if (!(config.tau > 1.0)) throw ParameterError("tau must exceed 1");
  SolverConfig solver = config.solver;
  solver.tau = config.tau;
  validate(solver);
}

Partition harden(const Factor& factor, int* zero_rows) {
  const Matrix& v = factor.values();
  std::vector<int> labels(static_cast<std::size_t>(v.rows()));
  int zeros = 0;
  for (Index i = 0; i < v.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < v.cols(); ++j) {
      if (v(i, j) > v(i, best)) best = j;
    }
    if (v(i, best) == 0.0) ++zeros;
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  if (zero_rows != nullptr) *zero_rows = zeros;
  return Partition(std::move(labels), static_cast<int>(v.cols()));
}

AffinityMatrix reconstruct_affinity(std::span<const Partition> partitions,
                                    const WeightVector& weights) {
  check_weights(partitions.size(), weights);
  const std::size_t n = partitions.front().size();
  for (const Partition& p : partitions) {
    if (p.size() != n) throw ShapeError("partitions cover different sample counts");
  }
  const Index nn = static_cast<Index>(n);
  Matrix s = Matrix::Zero(nn, nn);
  for (std::size_t m = 0; m < partitions.size(); ++m) {
    const double a = weights[static_cast<Index>(m)];
    const auto& labels = partitions[m].labels();
    for (Index j = 0; j < nn; ++j) {
      for (Index i = j; i < nn; ++i) {
        if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) s(i, j) += a;
      }
    }
  }
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return AffinityMatrix(std::move(s));
}

AffinityMatrix reconstruct_affinity_soft(std::span<const Factor> factors,
                                         const WeightVector& weights) {
  check_weights(factors.size(), weights);
  const Index n = factors.front().samples();
  Matrix s = Matrix::Zero(n, n);
  for (std::size_t m = 0; m < factors.size(); ++m) {
    if (factors[m].samples() != n) throw ShapeError("factors cover different sample counts");
    const Matrix& v = factors[m].values();
    s.noalias() += weights[static_cast<Index>(m)] * (v * v.transpose());
  }
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return AffinityMatrix(std::move(s));
}

std::uint64_t iteration_seed(std::uint64_t seed, int iteration) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(iteration)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::string digest(const Matrix& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::int64_t dims[2] = {m.rows(), m.cols()};
  mix(dims, sizeof(dims));
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      const double v = m(i, j);
      mix(&v, sizeof(v));
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PipelineResult run(const AffinityMatrix& affinity_init, const PipelineConfig& config) {
  const Index n = affinity_init.size();
  validate(config, n);
  SolverConfig solver = config.solver;
  solver.tau = config.tau;
  solver.learn_weights = config.mode != Mode::kUnweighted;

  PipelineResult result;
  AffinityMatrix s = affinity_init;
  double best_anmi = -1.0;

  for (int it = 0; it < config.max_outer_iters; ++it) {
    const auto start = std::chrono::steady_clock::now();
    OuterIteration record;
    record.affinity_digest = digest(s.values());

    auto factors = init_factors(n, config.c, config.b, iteration_seed(config.seed, it),
                                solver.epsilon_floor);
    EnsembleState state;
    try {
      state = solve_inner(s, std::move(factors), solver);
    } catch (const NumericError& e) {
      throw NumericError("outer iteration " + std::to_string(it) + ": " + e.what());
    }

    record.partitions.reserve(state.factors.size());
    for (const Factor& f : state.factors) {
      int zeros = 0;
      record.partitions.push_back(harden(f, &zeros));
      record.zero_rows += zeros;
    }
    record.anmi = anmi(record.partitions);
    record.inner_iterations = state.iterations;
    record.converged = state.converged;
    record.final_objective = state.objective_history.back();
    record.weights = state.weights;

    result.anmi_trace.push_back(record.anmi);
    result.affinity_trace_digest.push_back(record.affinity_digest);
    const bool improved = record.anmi > best_anmi;
    const bool dropped = record.anmi < best_anmi;
    if (improved) {
      best_anmi = record.anmi;
      result.selected_iteration = it;
      result.selected_affinity = s;
    }

    const bool last = dropped || it + 1 == config.max_outer_iters;
    if (!last) {
      switch (config.mode) {
        case Mode::kHard:
          s = reconstruct_affinity(record.partitions, state.weights);
          break;
        case Mode::kUnweighted:
          s = reconstruct_affinity(record.partitions, WeightVector::uniform(config.b));
          break;
        case Mode::kSoft:
          s = reconstruct_affinity_soft(state.factors, state.weights);
          break;
      }
    }
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.iterations.push_back(std::move(record));
    if (last) break;
  }

  const OuterIteration& chosen = result.iterations[static_cast<std::size_t>(result.selected_iteration)];
  result.partitions = chosen.partitions;
  result.weights = chosen.weights;
  Index top = 0;
  for (Index m = 1; m < result.weights.size(); ++m) {
    if (result.weights[m] > result.weights[top]) top = m;
  }
  result.best_partition = result.partitions[static_cast<std::size_t>(top)];
  return result;
}

}  // namespace s3nmf
