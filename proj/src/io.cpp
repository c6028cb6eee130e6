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

#include "s3nmf/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>

namespace s3nmf {
namespace {

using json = nlohmann::json;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  if (line.find(',') != std::string::npos) {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
  } else {
    std::istringstream ss(line);
    std::string cell;
    while (ss >> cell) cells.push_back(cell);
  }
  return cells;
}

std::string location(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row + 1) + ", column " + std::to_string(col + 1);
}

double parse_real(const std::string& cell, std::size_t row, std::size_t col) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  if (!cell.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (cell.empty() || ec != std::errc() || ptr != end) {
    throw InputError(location(row, col) + ": '" + cell + "' is not numeric");
  }
  if (!std::isfinite(value)) throw InputError(location(row, col) + ": non-finite value");
  return value;
}

long long parse_label(const std::string& cell, std::size_t row, std::size_t col) {
  long long value = 0;
  const char* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (cell.empty() || ec != std::errc() || ptr != end) {
    throw InputError(location(row, col) + ": label '" + cell + "' is not an integer");
  }
  return value;
}

// Rows of non-comment cells.
std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    rows.push_back(split_cells(t));
  }
  if (rows.empty()) throw InputError("'" + path.string() + "' contains no data rows");
  const std::size_t width = rows.front().size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw InputError("ragged row " + std::to_string(r + 1) + ": " +
                       std::to_string(rows[r].size()) + " cells, expected " + std::to_string(width));
    }
  }
  return rows;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  out.flush();
  if (!out) throw IoError("failed while writing '" + path.string() + "'");
}

json partition_json(const Partition& p) { return json(p.labels()); }

}  // namespace

LabelColumn LabelColumn::parse(std::string_view text) {
  if (text == "none") return none();
  if (text == "last") return last();
  int idx = -1;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), idx);
  if (ec != std::errc() || ptr != text.data() + text.size() || idx < 0) {
    throw ParameterError("label column must be none, last or a column index, got '" +
                         std::string(text) + "'");
  }
  return at(idx);
}

Partition reindex_labels(const std::vector<long long>& raw) {
  std::unordered_map<long long, int> ids;
  std::vector<int> labels;
  labels.reserve(raw.size());
  for (long long v : raw) {
    auto [it, inserted] = ids.try_emplace(v, static_cast<int>(ids.size()));
    labels.push_back(it->second);
  }
  const int c = std::max<int>(1, static_cast<int>(ids.size()));
  return Partition(std::move(labels), c);
}

Dataset load_dataset(const std::filesystem::path& path, LabelColumn label_column) {
  const auto rows = read_table(path);
  const std::size_t width = rows.front().size();
  std::optional<std::size_t> label_at;
  if (label_column.kind == LabelColumn::Kind::kLast) label_at = width - 1;
  if (label_column.kind == LabelColumn::Kind::kIndex) {
    if (static_cast<std::size_t>(label_column.index) >= width) {
      throw InputError("label column " + std::to_string(label_column.index) + " out of range (" +
                       std::to_string(width) + " columns)");
    }
    label_at = static_cast<std::size_t>(label_column.index);
  }
  const std::size_t d = width - (label_at ? 1 : 0);
  if (d == 0) throw InputError("no feature columns");

  Matrix x(static_cast<Index>(rows.size()), static_cast<Index>(d));
  std::vector<long long> raw;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::size_t f = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (label_at && c == *label_at) {
        raw.push_back(parse_label(rows[r][c], r, c));
      } else {
        x(static_cast<Index>(r), static_cast<Index>(f++)) = parse_real(rows[r][c], r, c);
      }
    }
  }
  Dataset ds{DataMatrix(std::move(x)), std::nullopt, path.stem().string()};
  if (label_at) ds.labels = reindex_labels(raw);
  return ds;
}

Partition load_labels(const std::filesystem::path& path) {
  const auto rows = read_table(path);
  if (rows.front().size() != 1) throw InputError("label file must have one value per line");
  std::vector<long long> raw;
  for (std::size_t r = 0; r < rows.size(); ++r) raw.push_back(parse_label(rows[r][0], r, 0));
  return reindex_labels(raw);
}

std::string dataset_digest(const DataMatrix& data) { return digest(data.values()); }

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void save_affinity(const AffinityMatrix& matrix, const std::filesystem::path& path) {
  std::string text;
  const Matrix& s = matrix.values();
  for (Index i = 0; i < s.rows(); ++i) {
    for (Index j = 0; j < s.cols(); ++j) {
      if (j > 0) text += ',';
      text += format_double(s(i, j));
    }
    text += '\n';
  }
  write_text(path, text);
}

AffinityMatrix load_affinity(const std::filesystem::path& path) {
  const auto rows = read_table(path);
  const std::size_t n = rows.size();
  if (rows.front().size() != n) {
    throw ValidationError("affinity file is " + std::to_string(n) + "x" +
                          std::to_string(rows.front().size()) + ", not square");
  }
  Matrix s(static_cast<Index>(n), static_cast<Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      s(static_cast<Index>(r), static_cast<Index>(c)) = parse_real(rows[r][c], r, c);
    }
  }
  return AffinityMatrix(std::move(s));
}

json to_json(const PipelineConfig& config) {
  return json{{"b", config.b},
              {"c", config.c},
              {"tau", config.tau},
              {"max_outer_iters", config.max_outer_iters},
              {"mode", std::string(to_string(config.mode))},
              {"seed", config.seed},
              {"solver",
               {{"max_inner_iters", config.solver.max_inner_iters},
                {"tol", config.solver.tol},
                {"epsilon_floor", config.solver.epsilon_floor},
                {"certify", config.solver.certify}}}};
}

PipelineConfig pipeline_config_from_json(const json& j) {
  PipelineConfig c;
  c.b = j.at("b").get<int>();
  c.c = j.at("c").get<int>();
  c.tau = j.at("tau").get<double>();
  c.max_outer_iters = j.at("max_outer_iters").get<int>();
  c.mode = parse_mode(j.at("mode").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  const json& s = j.at("solver");
  c.solver.max_inner_iters = s.at("max_inner_iters").get<int>();
  c.solver.tol = s.at("tol").get<double>();
  c.solver.epsilon_floor = s.at("epsilon_floor").get<double>();
  c.solver.certify = s.at("certify").get<bool>();
  c.solver.tau = c.tau;
  return c;
}

json to_json(const AffinityConfig& config) {
  return json{{"k", config.k},
              {"kernel", std::string(to_string(config.kernel))},
              {"symmetrize", std::string(to_string(config.symmetrize))},
              {"normalization", std::string(to_string(config.normalization))}};
}

AffinityConfig affinity_config_from_json(const json& j) {
  AffinityConfig c;
  c.k = j.at("k").get<int>();
  c.kernel = parse_kernel(j.at("kernel").get<std::string>());
  c.symmetrize = parse_symmetrization(j.at("symmetrize").get<std::string>());
  c.normalization = parse_normalization(j.at("normalization").get<std::string>());
  return c;
}

json to_json(const RunManifest& m) {
  return json{{"pipeline", to_json(m.pipeline)},
              {"affinity", to_json(m.affinity)},
              {"affinity_source", m.affinity_source},
              {"dataset_name", m.dataset_name},
              {"dataset_digest", m.dataset_digest},
              {"version", m.version}};
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.pipeline = pipeline_config_from_json(j.at("pipeline"));
  m.affinity = affinity_config_from_json(j.at("affinity"));
  m.affinity_source = j.at("affinity_source").get<std::string>();
  m.dataset_name = j.at("dataset_name").get<std::string>();
  m.dataset_digest = j.at("dataset_digest").get<std::string>();
  m.version = j.at("version").get<std::string>();
  return m;
}

json to_json(const MetricReport& r) {
  return json{{"acc", r.acc}, {"nmi", r.nmi}, {"pur", r.pur}, {"ari", r.ari}, {"f1", r.f1}};
}

MetricReport metric_report_from_json(const json& j) {
  MetricReport r;
  r.acc = j.at("acc").get<double>();
  r.nmi = j.at("nmi").get<double>();
  r.pur = j.at("pur").get<double>();
  r.ari = j.at("ari").get<double>();
  r.f1 = j.at("f1").get<double>();
  return r;
}

json results_to_json(const PipelineResult& result, const EnsembleReport* report,
                     const RunManifest& manifest, const RunTiming* timing) {
  json doc;
  doc["anmi_trace"] = result.anmi_trace;
  doc["selected_iteration"] = result.selected_iteration;
  doc["weights"] = std::vector<double>(result.weights.values().begin(), result.weights.values().end());
  json parts = json::array();
  for (const Partition& p : result.partitions) parts.push_back(partition_json(p));
  doc["partitions"] = std::move(parts);
  doc["best_partition"] = partition_json(result.best_partition);
  doc["affinity_trace_digest"] = result.affinity_trace_digest;
  json iters = json::array();
  for (const OuterIteration& it : result.iterations) {
    iters.push_back({{"anmi", it.anmi},
                     {"inner_iterations", it.inner_iterations},
                     {"converged", it.converged},
                     {"final_objective", it.final_objective},
                     {"zero_rows", it.zero_rows}});
  }
  doc["iterations"] = std::move(iters);
  if (report != nullptr) {
    json members = json::array();
    for (const MetricReport& r : report->members) members.push_back(to_json(r));
    doc["metrics"] = {{"members", std::move(members)},
                      {"summary", {{"mean", to_json(report->mean)}, {"std", to_json(report->std)}}}};
  }
  doc["manifest"] = to_json(manifest);
  if (timing != nullptr) {
    doc["timing"] = {{"started_at", timing->started_at},
                     {"finished_at", timing->finished_at},
                     {"wall_seconds_per_iteration", timing->wall_seconds_per_iteration}};
  }
  return doc;
}

void save_results(const PipelineResult& result, const EnsembleReport* report,
                  const RunManifest& manifest, const std::filesystem::path& path,
                  const RunTiming* timing) {
  write_text(path, results_to_json(result, report, manifest, timing).dump(2) + "\n");
}

ResultsDocument load_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  ResultsDocument doc;
  try {
    doc.raw = json::parse(in);
    doc.anmi_trace = doc.raw.at("anmi_trace").get<std::vector<double>>();
    doc.selected_iteration = doc.raw.at("selected_iteration").get<int>();
    doc.weights = doc.raw.at("weights").get<std::vector<double>>();
    doc.partitions = doc.raw.at("partitions").get<std::vector<std::vector<int>>>();
    doc.best_partition = doc.raw.at("best_partition").get<std::vector<int>>();
    doc.manifest = manifest_from_json(doc.raw.at("manifest"));
    if (doc.raw.contains("metrics")) {
      EnsembleReport rep;
      for (const json& m : doc.raw["metrics"].at("members")) rep.members.push_back(metric_report_from_json(m));
      rep.mean = metric_report_from_json(doc.raw["metrics"].at("summary").at("mean"));
      rep.std = metric_report_from_json(doc.raw["metrics"].at("summary").at("std"));
      doc.report = std::move(rep);
    }
  } catch (const json::exception& e) {
    throw InputError("malformed results file '" + path.string() + "': " + e.what());
  }
  return doc;
}

Dataset make_blobs(const BlobSpec& spec) {
  if (spec.n < 2 || spec.clusters < 1 || spec.dim < 1 || spec.n < spec.clusters) {
    throw ParameterError("invalid blob specification");
  }
  if (spec.clusters > 2 && spec.dim < 2) throw ParameterError("more than two blobs need dim >= 2");
  const double step = spec.separation * spec.sigma;
  Matrix centers = Matrix::Zero(spec.clusters, spec.dim);
  if (spec.clusters == 2) {
    centers(1, 0) = step;
  } else if (spec.clusters > 2) {
    const double radius = step / (2.0 * std::sin(std::numbers::pi / spec.clusters));
    for (int k = 0; k < spec.clusters; ++k) {
      const double angle = 2.0 * std::numbers::pi * k / spec.clusters;
      centers(k, 0) = radius * std::cos(angle);
      centers(k, 1) = radius * std::sin(angle);
    }
  }
  std::mt19937_64 engine(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.sigma);
  Matrix x(spec.n, spec.dim);
  std::vector<int> labels(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    // Contiguous groups whose sizes differ by at most one.
    const int k = static_cast<int>(static_cast<long long>(i) * spec.clusters / spec.n);
    labels[static_cast<std::size_t>(i)] = k;
    for (int d = 0; d < spec.dim; ++d) x(i, d) = centers(k, d) + noise(engine);
  }
  return Dataset{DataMatrix(std::move(x)), Partition(std::move(labels), spec.clusters),
                 "blobs-n" + std::to_string(spec.n)};
}

}  // namespace s3nmf
