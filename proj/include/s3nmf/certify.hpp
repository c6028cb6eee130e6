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

#ifndef S3NMF_CERTIFY_HPP_
#define S3NMF_CERTIFY_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s3nmf/core.hpp"

namespace s3nmf {

struct CertifyOptions {
  int instances = 50;
  int perturbations = 10;
  int max_n = 10;
  int max_c = 3;
  std::uint64_t seed = 0;
  // Test hook: replace the update exponent 1/4 by -1/4. Must be caught.
  bool flip_update = false;
};

struct CertifyFailure {
  int instance = 0;
  std::string check;
  nlohmann::json replay;  // S, V_prev, V_next, alpha, tau
};

struct CertifySuiteReport {
  int instances = 0;
  int certified = 0;  // instances whose every check passed
  int checks = 0;
  double worst_tightness = 0.0;  // max |g(V^t) - f(V^t)| / f(V^t)
  double worst_bound_slack = 0.0;  // min g(V) - f(V) over all evaluated V
  std::vector<CertifyFailure> failures;

  bool ok() const { return failures.empty(); }
};

/// Random instances (n <= max_n, c <= max_c, strictly positive V). For each:
/// the certificate at the multiplicative update must pass in full, and the
/// majorizer must stay tight at V^t and above f at `perturbations` random
/// positive perturbations plus a 10x scaling.
CertifySuiteReport run_certificate_suite(const CertifyOptions& options);

}  // namespace s3nmf

#endif  // S3NMF_CERTIFY_HPP_
