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

#ifndef S3NMF_IO_HPP_
#define S3NMF_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "s3nmf/affinity.hpp"
#include "s3nmf/core.hpp"
#include "s3nmf/metrics.hpp"
#include "s3nmf/pipeline.hpp"

namespace s3nmf {

inline constexpr std::string_view kVersion = "1.0.0";

struct Dataset {
  DataMatrix data;
  std::optional<Partition> labels;  // ground truth, never fed to the pipeline
  std::string name;
};

struct LabelColumn {
  enum class Kind { kNone, kLast, kIndex };
  Kind kind = Kind::kNone;
  int index = 0;

  static LabelColumn none() { return {}; }
  static LabelColumn last() { return {Kind::kLast, 0}; }
  static LabelColumn at(int i) { return {Kind::kIndex, i}; }
  /// "none", "last" or a zero-based column number.
  static LabelColumn parse(std::string_view text);
};

/// Reads one sample per line, comma or whitespace separated. Blank lines and
/// lines starting with '#' are skipped. Labels are re-indexed to 0..c-1 in
/// order of first appearance.
Dataset load_dataset(const std::filesystem::path& path, LabelColumn label_column);

/// Maps arbitrary integer labels to 0..c-1 by first appearance.
Partition reindex_labels(const std::vector<long long>& raw);

std::string dataset_digest(const DataMatrix& data);

/// Everything needed to reproduce a run. Wall-clock timestamps are kept
/// separately so that replays produce identical manifests.
struct RunManifest {
  PipelineConfig pipeline;
  AffinityConfig affinity;
  std::string affinity_source;  // "knn" or a file path
  std::string dataset_name;
  std::string dataset_digest;
  std::string version = std::string(kVersion);
};

struct RunTiming {
  std::string started_at;
  std::string finished_at;
  std::vector<double> wall_seconds_per_iteration;
};

/// Parsed form of a results file.
struct ResultsDocument {
  std::vector<double> anmi_trace;
  int selected_iteration = 0;
  std::vector<double> weights;
  std::vector<std::vector<int>> partitions;
  std::vector<int> best_partition;
  std::optional<EnsembleReport> report;
  RunManifest manifest;
  nlohmann::json raw;
};

nlohmann::json to_json(const PipelineConfig& config);
nlohmann::json to_json(const AffinityConfig& config);
nlohmann::json to_json(const RunManifest& manifest);
nlohmann::json to_json(const MetricReport& report);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
AffinityConfig affinity_config_from_json(const nlohmann::json& j);
RunManifest manifest_from_json(const nlohmann::json& j);
MetricReport metric_report_from_json(const nlohmann::json& j);

nlohmann::json results_to_json(const PipelineResult& result, const EnsembleReport* report,
                               const RunManifest& manifest, const RunTiming* timing);

/// Writes the results document; keys are sorted so files diff cleanly.
void save_results(const PipelineResult& result, const EnsembleReport* report,
                  const RunManifest& manifest, const std::filesystem::path& path,
                  const RunTiming* timing = nullptr);
ResultsDocument load_results(const std::filesystem::path& path);

/// Comma-separated dense matrix, shortest round-trip decimal per entry.
void save_affinity(const AffinityMatrix& matrix, const std::filesystem::path& path);
AffinityMatrix load_affinity(const std::filesystem::path& path);

/// Reads a file holding one integer label per line (re-indexed).
Partition load_labels(const std::filesystem::path& path);

struct BlobSpec {
  int n = 150;
  int clusters = 3;
  int dim = 2;
  double separation = 4.0;  // distance between adjacent centers, in sigmas
  double sigma = 1.0;
  std::uint64_t seed = 7;
};

/// Isotropic Gaussian blobs; centers on a regular polygon in the first two
/// coordinates so that adjacent centers are separation * sigma apart (for
/// three clusters every pair is). Sizes differ by at most one.
Dataset make_blobs(const BlobSpec& spec);

std::string format_double(double v);

}  // namespace s3nmf

#endif  // S3NMF_IO_HPP_
