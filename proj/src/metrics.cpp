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

#include "s3nmf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace s3nmf {
namespace {

using Table = std::vector<std::vector<std::int64_t>>;

void check_same_size(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) {
    throw ShapeError("partitions have different lengths (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
  if (a.size() == 0) throw ShapeError("partitions are empty");
}

double choose2(std::int64_t k) { return 0.5 * static_cast<double>(k) * static_cast<double>(k - 1); }

std::vector<std::int64_t> row_sums(const Table& t) {
  std::vector<std::int64_t> out;
  for (const auto& row : t) out.push_back(std::accumulate(row.begin(), row.end(), std::int64_t{0}));
  return out;
}

std::vector<std::int64_t> col_sums(const Table& t) {
  std::vector<std::int64_t> out(t.empty() ? 0 : t.front().size(), 0);
  for (const auto& row : t) {
    for (std::size_t j = 0; j < row.size(); ++j) out[j] += row[j];
  }
  return out;
}

double entropy(const std::vector<std::int64_t>& counts, double n) {
  double h = 0.0;
  for (std::int64_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

// Same equivalence relation, i.e. identical up to relabeling.
bool same_relation(const Table& t) {
  for (const auto& row : t) {
    if (std::count_if(row.begin(), row.end(), [](std::int64_t v) { return v > 0; }) > 1) return false;
  }
  const auto cols = col_sums(t);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    int hits = 0;
    for (const auto& row : t) hits += row[j] > 0 ? 1 : 0;
    if (hits > 1) return false;
  }
  return true;
}

// Same-cluster pair counts: (both, pred only total, truth only total).
struct PairCounts {
  double both = 0.0;
  double pred = 0.0;
  double truth = 0.0;
  double total = 0.0;
};

PairCounts pair_counts(const Table& t, std::size_t n) {
  PairCounts pc;
  for (const auto& row : t) {
    for (std::int64_t v : row) pc.both += choose2(v);
  }
  for (std::int64_t v : row_sums(t)) pc.pred += choose2(v);
  for (std::int64_t v : col_sums(t)) pc.truth += choose2(v);
  pc.total = choose2(static_cast<std::int64_t>(n));
  return pc;
}

}  // namespace

Table contingency(const Partition& pred, const Partition& truth) {
  check_same_size(pred, truth);
  Table t(static_cast<std::size_t>(pred.clusters()),
          std::vector<std::int64_t>(static_cast<std::size_t>(truth.clusters()), 0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++t[static_cast<std::size_t>(pred[i])][static_cast<std::size_t>(truth[i])];
  }
  return t;
}

double nmi(const Partition& p, const Partition& q) {
  const Table t = contingency(p, q);
  const double n = static_cast<double>(p.size());
  const auto a = row_sums(t);
  const auto b = col_sums(t);
  const double hp = entropy(a, n);
  const double hq = entropy(b, n);
  if (hp + hq == 0.0) return same_relation(t) ? 1.0 : 0.0;
  double mi = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < t[i].size(); ++j) {
      if (t[i][j] == 0) continue;
      const double nij = static_cast<double>(t[i][j]);
      mi += (nij / n) * std::log(nij * n / (static_cast<double>(a[i]) * static_cast<double>(b[j])));
    }
  }
  return std::clamp(mi / (0.5 * (hp + hq)), 0.0, 1.0);
}

double anmi(std::span<const Partition> partitions) {
  const std::size_t b = partitions.size();
  if (b < 2) throw ParameterError("anmi needs at least two partitions");
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = i + 1; j < b; ++j) total += nmi(partitions[i], partitions[j]);
  }
  return total / (0.5 * static_cast<double>(b) * static_cast<double>(b - 1));
}

std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weight) {
  // Shortest augmenting path form of the Hungarian method on cost = -weight.
  const int n = static_cast<int>(weight.size());
  for (const auto& row : weight) {
    if (static_cast<int>(row.size()) != n) throw ShapeError("assignment matrix must be square");
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -weight[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) assignment[p[j] - 1] = j - 1;
  }
  return assignment;
}

double acc(const Partition& pred, const Partition& truth) {
  const Table t = contingency(pred, truth);
  const std::size_t k = std::max(t.size(), t.front().size());
  // Zero-padded to square; dummy rows/columns contribute nothing.
  std::vector<std::vector<double>> w(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < t[i].size(); ++j) w[i][j] = static_cast<double>(t[i][j]);
  }
  const auto assignment = max_weight_assignment(w);
  std::int64_t hit = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto j = static_cast<std::size_t>(assignment[i]);
    if (j < t[i].size()) hit += t[i][j];
  }
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

double purity(const Partition& pred, const Partition& truth) {
  const Table t = contingency(pred, truth);
  std::int64_t hit = 0;
  for (const auto& row : t) hit += *std::max_element(row.begin(), row.end());
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

double ari(const Partition& pred, const Partition& truth) {
  const Table t = contingency(pred, truth);
  if (pred.size() < 2) throw ShapeError("ari needs at least two samples");
  const PairCounts pc = pair_counts(t, pred.size());
  const double expected = pc.pred * pc.truth / pc.total;
  const double max_index = 0.5 * (pc.pred + pc.truth);
  const double denom = max_index - expected;
  if (denom == 0.0) return same_relation(t) ? 1.0 : 0.0;
  return (pc.both - expected) / denom;
}

double f1(const Partition& pred, const Partition& truth) {
  const Table t = contingency(pred, truth);
  if (pred.size() < 2) throw ShapeError("f1 needs at least two samples");
  const PairCounts pc = pair_counts(t, pred.size());
  if (pc.pred == 0.0) return pc.truth == 0.0 ? 1.0 : 0.0;
  if (pc.both == 0.0) return 0.0;
  const double precision = pc.both / pc.pred;
  const double recall = pc.both / pc.truth;
  return 2.0 * precision * recall / (precision + recall);
}

MetricReport evaluate(const Partition& pred, const Partition& truth) {
  MetricReport r;
  r.acc = acc(pred, truth);
  r.nmi = nmi(pred, truth);
  r.pur = purity(pred, truth);
  r.ari = ari(pred, truth);
  r.f1 = f1(pred, truth);
  return r;
}

EnsembleReport evaluate_ensemble(std::span<const Partition> members, const Partition& truth) {
  std::vector<MetricReport> scores;
  scores.reserve(members.size());
  for (const Partition& p : members) scores.push_back(evaluate(p, truth));
  return summarize(std::move(scores));
}

EnsembleReport summarize(std::vector<MetricReport> members) {
  if (members.empty()) throw ParameterError("no members to summarize");
  EnsembleReport out;
  out.members = std::move(members);
  const double b = static_cast<double>(out.members.size());
  using Field = double MetricReport::*;
  for (Field f : {&MetricReport::acc, &MetricReport::nmi, &MetricReport::pur, &MetricReport::ari,
                  &MetricReport::f1}) {
    double sum = 0.0;
    for (const MetricReport& r : out.members) sum += r.*f;
    const double mean = sum / b;
    double sq = 0.0;
    for (const MetricReport& r : out.members) sq += (r.*f - mean) * (r.*f - mean);
    out.mean.*f = mean;
    out.std.*f = out.members.size() > 1 ? std::sqrt(sq / (b - 1.0)) : 0.0;
  }
  return out;
}

namespace oracle {

double acc_brute_force(const Partition& pred, const Partition& truth) {
  const Table t = contingency(pred, truth);
  const std::size_t rows = t.size();
  const std::size_t cols = t.front().size();
  const std::size_t k = std::max(rows, cols);
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::int64_t best = 0;
  do {
    std::int64_t hit = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      if (perm[i] < cols) hit += t[i][perm[i]];
    }
    best = std::max(best, hit);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(pred.size());
}

OracleSuiteReport run_acc_suite(int cases, int max_clusters, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::uniform_int_distribution<int> size_dist(2, 40);
  std::uniform_int_distribution<int> k_dist(1, max_clusters);
  OracleSuiteReport report;
  for (int c = 0; c < cases; ++c) {
    const int n = size_dist(engine);
    const int kp = k_dist(engine);
    const int kt = k_dist(engine);
    std::uniform_int_distribution<int> lp(0, kp - 1), lt(0, kt - 1);
    std::vector<int> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = lp(engine);
      b[i] = lt(engine);
    }
    const Partition pred(std::move(a), kp);
    const Partition truth(std::move(b), kt);
    ++report.cases;
    const double fast = acc(pred, truth);
    const double slow = acc_brute_force(pred, truth);
    if (fast != slow) {
      ++report.mismatches;
      if (report.first_failure.empty()) {
        std::ostringstream os;
        os << "case " << c << ": assignment " << fast << " vs brute force " << slow;
        report.first_failure = os.str();
      }
    }
  }
  return report;
}

}  // namespace oracle

}  // namespace s3nmf
