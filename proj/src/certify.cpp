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

#include "s3nmf/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "s3nmf/solver.hpp"

namespace s3nmf {
namespace {

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

Factor flipped_update(const AffinityMatrix& s, const Factor& v) {
  const Matrix& x = v.values();
  const Matrix numer = s.values() * x;
  const Matrix denom = x * (x.transpose() * x);
  Matrix out = x;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      out(i, j) = x(i, j) * std::pow(numer(i, j) / std::max(denom(i, j), 1e-12), -0.25);
    }
  }
  return Factor(std::move(out));
}

}  // namespace

CertifySuiteReport run_certificate_suite(const CertifyOptions& options) {
  if (options.instances < 0 || options.perturbations < 0 || options.max_n < 2 || options.max_c < 1) {
    throw ParameterError("invalid certificate suite options");
  }
  std::mt19937_64 engine(options.seed);
  std::uniform_int_distribution<int> n_dist(2, options.max_n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  CertifySuiteReport report;
  report.worst_bound_slack = std::numeric_limits<double>::infinity();
  for (int inst = 0; inst < options.instances; ++inst) {
    const int n = n_dist(engine);
    std::uniform_int_distribution<int> c_dist(1, std::min(options.max_c, n));
    const int c = c_dist(engine);

    Matrix s(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        s(i, j) = unit(engine);
        s(j, i) = s(i, j);
      }
    }
    Matrix v(n, c);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < c; ++j) v(i, j) = 0.05 + unit(engine);
    }
    const double alpha = 0.05 + 0.95 * unit(engine);
    const double tau = 1.5 + 2.5 * unit(engine);
    const AffinityMatrix affinity(s);
    const Factor prev(v);
    const Factor next = options.flip_update ? flipped_update(affinity, prev) : update_factor(affinity, prev);

    bool passed = true;
    auto fail = [&](const std::string& check, const Factor& other) {
      passed = false;
      report.failures.push_back(
          {inst, check,
           {{"S", matrix_json(s)}, {"V_prev", matrix_json(v)}, {"V_next", matrix_json(other.values())},
            {"alpha", alpha}, {"tau", tau}}});
    };
    auto track = [&](const AuxiliaryCertificate& cert) {
      ++report.checks;
      if (cert.f_prev > 0.0) {
        report.worst_tightness =
            std::max(report.worst_tightness, std::abs(cert.g_prev - cert.f_prev) / cert.f_prev);
      }
      report.worst_bound_slack = std::min(report.worst_bound_slack, cert.g_next - cert.f_next);
    };

    const AuxiliaryCertificate at_update = certify_auxiliary(affinity, prev, next, alpha, tau);
    track(at_update);
    if (!at_update.ok) fail("update", next);
    if (!(at_update.min_curvature > 0.0)) fail("curvature", next);

    for (int p = 0; p <= options.perturbations; ++p) {
      Matrix w = v;
      if (p == options.perturbations) {
        w *= 10.0;
      } else {
        for (Index i = 0; i < w.rows(); ++i) {
          for (Index j = 0; j < w.cols(); ++j) w(i, j) *= std::exp(gauss(engine));
        }
      }
      const Factor other(w);
      const AuxiliaryCertificate cert = certify_auxiliary(affinity, prev, other, alpha, tau);
      track(cert);
      if (!cert.tight || !cert.bounded) fail(p == options.perturbations ? "scaled" : "perturbed", other);
      if (!(cert.min_curvature > 0.0)) fail("curvature", other);
    }
    ++report.instances;
    if (passed) ++report.certified;
  }
  return report;
}

}  // namespace s3nmf
