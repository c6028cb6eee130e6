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

#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "s3nmf/affinity.hpp"
#include "s3nmf/certify.hpp"
#include "s3nmf/io.hpp"
#include "s3nmf/metrics.hpp"
#include "s3nmf/pipeline.hpp"
#include "s3nmf/solver.hpp"

namespace s3nmf::cli {
namespace {

using json = nlohmann::json;

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Flags shared by run, ablate and bench.
struct RunFlags {
  int clusters = 0;
  int ensemble = 20;
  double tau = 2.0;
  int max_outer = 10;
  int max_inner = 500;
  double tol = 1e-3;
  int k_neighbors = 0;
  std::string kernel = "selftuning";
  std::string symmetrize = "union";
  std::string normalize = "symmetric";
  std::string mode = "hard";
  std::uint64_t seed = 0;
  std::string label_column = "last";
  std::string affinity_in;
  std::string affinity_out;
  std::string out;
  std::string manifest;
};

void add_affinity_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--k-neighbors,-k", f.k_neighbors, "Neighbours per sample (0 = floor(log2 n) + 1)")
      ->envname("S3NMF_K_NEIGHBORS");
  app->add_option("--kernel", f.kernel, "Edge weight kernel")
      ->check(CLI::IsMember({"selftuning", "binary"}))
      ->envname("S3NMF_KERNEL");
  app->add_option("--symmetrize", f.symmetrize, "kNN symmetrization")
      ->check(CLI::IsMember({"union", "average"}))
      ->envname("S3NMF_SYMMETRIZE");
  app->add_option("--normalize", f.normalize, "Degree normalization of the graph")
      ->check(CLI::IsMember({"symmetric", "none"}))
      ->envname("S3NMF_NORMALIZE");
  app->add_option("--label-column", f.label_column, "none, last, or a zero-based column index")
      ->envname("S3NMF_LABEL_COLUMN");
}

void add_run_flags(CLI::App* app, RunFlags& f) {
  add_affinity_flags(app, f);
  app->add_option("--clusters,-c", f.clusters, "Cluster count (default: number of label classes)")
      ->envname("S3NMF_CLUSTERS");
  app->add_option("--ensemble,-b", f.ensemble, "Ensemble size")->envname("S3NMF_ENSEMBLE");
  app->add_option("--tau", f.tau, "Weight concentration exponent (> 1)")->envname("S3NMF_TAU");
  app->add_option("--max-outer", f.max_outer, "Maximum outer iterations")->envname("S3NMF_MAX_OUTER");
  app->add_option("--max-inner", f.max_inner, "Maximum inner iterations")->envname("S3NMF_MAX_INNER");
  app->add_option("--tol", f.tol, "Inner convergence tolerance")->envname("S3NMF_TOL");
  app->add_option("--mode", f.mode, "Affinity reconstruction mode")
      ->check(CLI::IsMember({"hard", "soft", "unweighted"}))
      ->envname("S3NMF_MODE");
  app->add_option("--seed", f.seed, "Random seed")->envname("S3NMF_SEED");
  app->add_option("--affinity-in", f.affinity_in, "Use a precomputed affinity file")
      ->envname("S3NMF_AFFINITY_IN");
  app->add_option("--affinity-out", f.affinity_out, "Also write the input affinity")
      ->envname("S3NMF_AFFINITY_OUT");
  app->add_option("--out,-o", f.out, "Output file")->envname("S3NMF_OUT");
}

AffinityConfig affinity_config(const RunFlags& f) {
  AffinityConfig c;
  c.k = f.k_neighbors;
  c.kernel = parse_kernel(f.kernel);
  c.symmetrize = parse_symmetrization(f.symmetrize);
  c.normalization = parse_normalization(f.normalize);
  return c;
}

PipelineConfig pipeline_config(const RunFlags& f, const Dataset& ds) {
  PipelineConfig c;
  c.b = f.ensemble;
  c.c = f.clusters;
  if (c.c == 0) {
    if (!ds.labels) throw ParameterError("--clusters is required when the data has no labels");
    c.c = ds.labels->clusters();
  }
  c.tau = f.tau;
  c.max_outer_iters = f.max_outer;
  c.mode = parse_mode(f.mode);
  c.seed = f.seed;
  c.solver.tau = f.tau;
  c.solver.max_inner_iters = f.max_inner;
  c.solver.tol = f.tol;
  return c;
}

AffinityMatrix input_affinity(const RunManifest& manifest, const Dataset& ds) {
  if (manifest.affinity_source != "knn") {
    AffinityMatrix s = load_affinity(manifest.affinity_source);
    if (s.size() != ds.data.samples()) {
      throw ShapeError("affinity file covers " + std::to_string(s.size()) + " samples, dataset has " +
                       std::to_string(ds.data.samples()));
    }
    return s;
  }
  return build_affinity(ds.data, manifest.affinity);
}

// Pooled member scores of several runs.
struct Pool {
  std::vector<MetricReport> members;

  void add(const std::vector<Partition>& parts, const Partition& truth) {
    const EnsembleReport r = evaluate_ensemble(parts, truth);
    members.insert(members.end(), r.members.begin(), r.members.end());
  }
  EnsembleReport summary() const { return summarize(members); }
};

void print_table_header(std::ostream& out, const std::string& first) {
  out << std::left << std::setw(12) << first;
  for (const char* m : {"ACC", "NMI", "PUR", "ARI", "F1"}) out << std::setw(18) << m;
  out << "\n";
}

void print_table_row(std::ostream& out, const std::string& name, const EnsembleReport& r) {
  auto cell = [](double mean, double sd) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << mean << "+-" << sd;
    return os.str();
  };
  out << std::left << std::setw(12) << name << std::setw(18) << cell(r.mean.acc, r.std.acc)
      << std::setw(18) << cell(r.mean.nmi, r.std.nmi) << std::setw(18) << cell(r.mean.pur, r.std.pur)
      << std::setw(18) << cell(r.mean.ari, r.std.ari) << std::setw(18) << cell(r.mean.f1, r.std.f1)
      << "\n";
}

json summary_json(const EnsembleReport& r) {
  return {{"mean", to_json(r.mean)}, {"std", to_json(r.std)}, {"members", r.members.size()}};
}

void write_json(const std::string& path, const json& doc, std::ostream& out) {
  if (path.empty()) {
    out << doc.dump(2) << "\n";
    return;
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << doc.dump(2) << "\n";
  if (!f) throw IoError("failed while writing '" + path + "'");
}

int cmd_affinity(const std::string& dataset, const RunFlags& f, std::ostream& out) {
  const Dataset ds = load_dataset(dataset, LabelColumn::parse(f.label_column));
  const AffinityMatrix s = build_affinity(ds.data, affinity_config(f));
  const std::string path = !f.affinity_out.empty() ? f.affinity_out : f.out;
  if (path.empty()) throw ParameterError("affinity needs --out or --affinity-out");
  save_affinity(s, path);
  out << "wrote " << s.size() << "x" << s.size() << " affinity to " << path << "\n";
  return kOk;
}

int cmd_run(const std::string& dataset, const RunFlags& f, std::ostream& out) {
  RunManifest manifest;
  const Dataset ds = load_dataset(dataset, LabelColumn::parse(f.label_column));
  if (!f.manifest.empty()) {
    manifest = load_results(f.manifest).manifest;
    if (manifest.dataset_digest != dataset_digest(ds.data)) {
      throw InputError("dataset does not match the manifest digest");
    }
  } else {
    manifest.pipeline = pipeline_config(f, ds);
    manifest.affinity = affinity_config(f);
    manifest.affinity_source = f.affinity_in.empty() ? "knn" : f.affinity_in;
    manifest.dataset_digest = dataset_digest(ds.data);
  }
  manifest.dataset_name = ds.name;

  RunTiming timing;
  timing.started_at = utc_now();
  const AffinityMatrix w = input_affinity(manifest, ds);
  if (!f.affinity_out.empty()) save_affinity(w, f.affinity_out);

  // Ground truth stays here; the pipeline only ever sees the affinity.
  const PipelineResult result = run(w, manifest.pipeline);
  timing.finished_at = utc_now();
  for (const auto& it : result.iterations) timing.wall_seconds_per_iteration.push_back(it.wall_seconds);

  std::optional<EnsembleReport> report;
  if (ds.labels) report = evaluate_ensemble(result.partitions, *ds.labels);
  const json doc = results_to_json(result, report ? &*report : nullptr, manifest, &timing);
  if (f.out.empty()) {
    out << doc.dump(2) << "\n";
  } else {
    save_results(result, report ? &*report : nullptr, manifest, f.out, &timing);
    out << "selected iteration " << result.selected_iteration << " of " << result.anmi_trace.size()
        << ", ANMI " << std::setprecision(6) << result.anmi_trace[static_cast<std::size_t>(result.selected_iteration)]
        << "\n";
    if (report) {
      print_table_header(out, "method");
      print_table_row(out, "S3NMF", *report);
    }
  }
  return kOk;
}

int cmd_eval(const std::string& dataset, const std::string& label_column, const std::string& results,
             const std::string& pred, const std::string& out_path, std::ostream& out) {
  const Dataset ds = load_dataset(dataset, LabelColumn::parse(label_column));
  if (!ds.labels) throw ParameterError("eval needs ground-truth labels (--label-column)");
  std::vector<Partition> members;
  if (!results.empty()) {
    const ResultsDocument doc = load_results(results);
    for (const auto& labels : doc.partitions) {
      const int c = labels.empty() ? 1 : *std::max_element(labels.begin(), labels.end()) + 1;
      members.emplace_back(labels, std::max(c, doc.manifest.pipeline.c));
    }
  } else if (!pred.empty()) {
    members.push_back(load_labels(pred));
  } else {
    throw ParameterError("eval needs --results or --pred");
  }
  for (const Partition& p : members) {
    if (p.size() != ds.labels->size()) throw ShapeError("prediction length does not match dataset");
  }
  const EnsembleReport r = evaluate_ensemble(members, *ds.labels);
  print_table_header(out, "members");
  print_table_row(out, std::to_string(members.size()), r);
  if (!out_path.empty()) {
    json members_json = json::array();
    for (const auto& m : r.members) members_json.push_back(to_json(m));
    write_json(out_path, {{"members", members_json}, {"summary", summary_json(r)}}, out);
  }
  return kOk;
}

struct AblationRow {
  std::string name;
  EnsembleReport report;
};

std::vector<AblationRow> ablation_table(const AffinityMatrix& w, const PipelineConfig& base_cfg,
                                        const Partition& truth, int repetitions) {
  struct Variant {
    std::string name;
    Mode mode;
    bool single_pass;
  };
  const Variant variants[] = {{"SNMF", Mode::kHard, true},
                              {"w/o-alpha", Mode::kUnweighted, false},
                              {"SOFT", Mode::kSoft, false},
                              {"S3NMF", Mode::kHard, false}};
  std::vector<AblationRow> rows;
  for (const Variant& v : variants) {
    Pool pool;
    for (int r = 0; r < repetitions; ++r) {
      PipelineConfig cfg = base_cfg;
      cfg.seed = base_cfg.seed + static_cast<std::uint64_t>(r);
      cfg.mode = v.mode;
      if (v.single_pass) cfg.max_outer_iters = 1;
      pool.add(run(w, cfg).partitions, truth);
    }
    rows.push_back({v.name, pool.summary()});
  }
  return rows;
}

int cmd_ablate(const std::string& dataset, const RunFlags& f, int repetitions, std::ostream& out) {
  const Dataset ds = load_dataset(dataset, LabelColumn::parse(f.label_column));
  if (!ds.labels) throw ParameterError("ablate needs ground-truth labels (--label-column)");
  if (repetitions < 1) throw ParameterError("--repetitions must be at least 1");
  const AffinityMatrix w = f.affinity_in.empty() ? build_affinity(ds.data, affinity_config(f))
                                                 : load_affinity(f.affinity_in);
  const PipelineConfig cfg = pipeline_config(f, ds);
  const auto rows = ablation_table(w, cfg, *ds.labels, repetitions);

  print_table_header(out, "method");
  json doc = json::array();
  for (const auto& row : rows) {
    print_table_row(out, row.name, row.report);
    doc.push_back({{"method", row.name}, {"summary", summary_json(row.report)}});
  }
  if (!f.out.empty()) write_json(f.out, {{"dataset", ds.name}, {"rows", doc}}, out);
  return kOk;
}

double seconds_per_inner_iteration(int n, int c, int b, int iters, std::uint64_t seed) {
  const Dataset ds = make_blobs({.n = n, .clusters = c, .dim = 2, .separation = 4.0, .sigma = 1.0, .seed = seed});
  const AffinityMatrix w = build_affinity(ds.data);
  SolverConfig cfg;
  cfg.max_inner_iters = iters;
  cfg.tol = 1e-300;
  double best = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 3; ++rep) {
    auto factors = init_factors(n, c, b, seed + static_cast<std::uint64_t>(rep));
    const auto start = std::chrono::steady_clock::now();
    const EnsembleState st = solve_inner(w, std::move(factors), cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    best = std::min(best, secs / std::max(1, st.iterations));
  }
  return best;
}

int cmd_bench(const std::vector<std::string>& datasets, const RunFlags& f, int repetitions,
              bool scaling, int scaling_base, int scaling_steps, std::ostream& out) {
  if (repetitions < 1) throw ParameterError("--repetitions must be at least 1");
  json doc;
  if (!datasets.empty()) {
    json tables = json::array();
    for (const std::string& path : datasets) {
      const Dataset ds = load_dataset(path, LabelColumn::parse(f.label_column));
      if (!ds.labels) throw ParameterError("bench needs ground-truth labels in '" + path + "'");
      const AffinityMatrix w = build_affinity(ds.data, affinity_config(f));
      const PipelineConfig cfg = pipeline_config(f, ds);
      Pool base, full;
      std::vector<int> selected;
      double wall = 0.0;
      int outer = 0;
      for (int r = 0; r < repetitions; ++r) {
        PipelineConfig c1 = cfg;
        c1.seed = cfg.seed + static_cast<std::uint64_t>(r);
        PipelineConfig c0 = c1;
        c0.max_outer_iters = 1;
        base.add(run(w, c0).partitions, *ds.labels);
        const PipelineResult res = run(w, c1);
        full.add(res.partitions, *ds.labels);
        selected.push_back(res.selected_iteration);
        for (const auto& it : res.iterations) wall += it.wall_seconds;
        outer += static_cast<int>(res.iterations.size());
      }
      out << ds.name << " (n=" << ds.data.samples() << ", c=" << cfg.c << ", " << repetitions
          << " repetitions)\n";
      print_table_header(out, "method");
      print_table_row(out, "SNMF", base.summary());
      print_table_row(out, "S3NMF", full.summary());
      out << "mean wall seconds per outer iteration: " << wall / std::max(outer, 1) << "\n\n";
      tables.push_back({{"dataset", ds.name},
                        {"snmf", summary_json(base.summary())},
                        {"s3nmf", summary_json(full.summary())},
                        {"selected_iterations", selected},
                        {"outer_iterations", outer},
                        {"wall_seconds", wall}});
    }
    doc["datasets"] = tables;
  }
  if (scaling) {
    json rows = json::array();
    out << std::left << std::setw(10) << "n" << std::setw(22) << "sec/inner-iteration" << "ratio\n";
    double prev = 0.0;
    for (int s = 0; s < scaling_steps; ++s) {
      const int n = scaling_base << s;
      const double t = seconds_per_inner_iteration(n, 3, 4, 30, f.seed);
      out << std::left << std::setw(10) << n << std::setw(22) << t;
      json row = {{"n", n}, {"seconds_per_inner_iteration", t}};
      if (s > 0) {
        out << t / prev;
        row["ratio"] = t / prev;
      }
      out << "\n";
      rows.push_back(row);
      prev = t;
    }
    out << "expected ratio per doubling of n: about 4 (2.5 to 6)\n";
    doc["scaling"] = rows;
  }
  if (datasets.empty() && !scaling) throw ParameterError("bench needs datasets or --scaling");
  if (!f.out.empty()) write_json(f.out, doc, out);
  return kOk;
}

int cmd_certify(int instances, std::uint64_t seed, bool inject_fault, const std::string& out_path,
                std::ostream& out, std::ostream& err) {
  CertifyOptions opts;
  opts.instances = instances;
  opts.seed = seed;
  opts.flip_update = inject_fault;
  const CertifySuiteReport cert = run_certificate_suite(opts);
  out << "auxiliary-function certificates: " << cert.certified << "/" << cert.instances
      << " instances certified (" << cert.checks << " evaluations, worst tightness gap "
      << cert.worst_tightness << ", min bound slack " << cert.worst_bound_slack << ")\n";
  const OracleSuiteReport oracle = oracle::run_acc_suite(200, 6, seed);
  out << "metric oracles: " << oracle.cases - oracle.mismatches << "/" << oracle.cases
      << " assignment ACC values match brute force\n";

  if (cert.ok() && oracle.mismatches == 0) return kOk;
  if (!cert.ok()) {
    const auto& first = cert.failures.front();
    json replay = {{"instance", first.instance}, {"check", first.check}, {"replay", first.replay}};
    err << "certificate failure in instance " << first.instance << " (" << first.check << ")\n";
    if (!out_path.empty()) {
      write_json(out_path, replay, out);
    } else {
      err << replay.dump() << "\n";
    }
  }
  if (oracle.mismatches > 0) err << "metric oracle failure: " << oracle.first_failure << "\n";
  return kNumericError;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-supervised symmetric NMF clustering"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = hardware)")->envname("S3NMF_THREADS");

  RunFlags flags;
  std::string dataset;

  auto* affinity = app.add_subcommand("affinity", "Build the kNN affinity of a dataset");
  affinity->add_option("dataset", dataset, "Delimited data file")->required();
  add_affinity_flags(affinity, flags);
  affinity->add_option("--affinity-out,--out,-o", flags.affinity_out, "Output file")->envname("S3NMF_AFFINITY_OUT");

  auto* run_cmd = app.add_subcommand("run", "Cluster a dataset");
  run_cmd->add_option("dataset", dataset, "Delimited data file")->required();
  add_run_flags(run_cmd, flags);
  run_cmd->add_option("--manifest", flags.manifest, "Replay the manifest of a results file");

  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  std::string results, pred;
  eval->add_option("dataset", dataset, "Delimited data file with labels")->required();
  eval->add_option("--label-column", flags.label_column, "none, last, or a column index")
      ->envname("S3NMF_LABEL_COLUMN");
  eval->add_option("--results", results, "Results file from run");
  eval->add_option("--pred", pred, "File with one predicted label per line");
  eval->add_option("--out,-o", flags.out, "Write the report as JSON");

  int repetitions = 1;
  auto* ablate = app.add_subcommand("ablate", "Compare SNMF, w/o-alpha, SOFT and S3NMF");
  ablate->add_option("dataset", dataset, "Delimited data file with labels")->required();
  add_run_flags(ablate, flags);
  ablate->add_option("--repetitions", repetitions, "Seeds per variant")->envname("S3NMF_REPETITIONS");

  std::vector<std::string> bench_sets;
  bool scaling = false;
  int scaling_base = 250;
  int scaling_steps = 3;
  int bench_reps = 20;
  auto* bench = app.add_subcommand("bench", "Repeated-trial benchmark and scaling check");
  bench->add_option("datasets", bench_sets, "Delimited data files with labels");
  add_run_flags(bench, flags);
  bench->add_option("--repetitions", bench_reps, "Repetitions per dataset")->envname("S3NMF_REPETITIONS");
  bench->add_flag("--scaling", scaling, "Time inner iterations while doubling n");
  bench->add_option("--scaling-base", scaling_base, "Smallest n of the scaling sweep");
  bench->add_option("--scaling-steps", scaling_steps, "Number of sizes in the sweep");

  int instances = 50;
  bool inject_fault = false;
  std::uint64_t cert_seed = 0;
  std::string cert_out;
  auto* certify = app.add_subcommand("certify", "Check the auxiliary-function bound and metric oracles");
  certify->add_option("--instances", instances, "Random instances")->envname("S3NMF_INSTANCES");
  certify->add_option("--seed", cert_seed, "Random seed")->envname("S3NMF_SEED");
  certify->add_option("--out,-o", cert_out, "Write the first failing instance here");
  certify->add_flag("--inject-fault", inject_fault, "Use a sign-flipped update (negative control)")
      ->group("");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (affinity->parsed()) return cmd_affinity(dataset, flags, out);
    if (run_cmd->parsed()) return cmd_run(dataset, flags, out);
    if (eval->parsed()) return cmd_eval(dataset, flags.label_column, results, pred, flags.out, out);
    if (ablate->parsed()) return cmd_ablate(dataset, flags, repetitions, out);
    if (bench->parsed()) {
      return cmd_bench(bench_sets, flags, bench_reps, scaling, scaling_base, scaling_steps, out);
    }
    if (certify->parsed()) return cmd_certify(instances, cert_seed, inject_fault, cert_out, out, err);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const Error& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace s3nmf::cli
