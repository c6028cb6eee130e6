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

#ifndef S3NMF_SOLVER_HPP_
#define S3NMF_SOLVER_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "s3nmf/core.hpp"

namespace s3nmf {

struct SolverConfig {
  double tau = 2.0;
  int max_inner_iters = 500;
  // Stop once max(|V^t - V^{t-1}|_inf, |a^t - a^{t-1}|_inf) < tol.
  double tol = 1e-3;
  double epsilon_floor = 1e-12;
  // Run the auxiliary-function certificate after every factor update and
  // throw CertificateError on the first failure. Slow; diagnostic only.
  bool certify = false;
  // When false the weights stay uniform (the unweighted ablation).
  bool learn_weights = true;
};

void validate(const SolverConfig& config);

/// b factors with i.i.d. entries uniform on (epsilon_floor, 1].
std::vector<Factor> init_factors(Index n, Index c, Index b, std::uint64_t seed,
                                 double epsilon_floor = 1e-12);

/// One multiplicative step: V <- V * ((S V) / (V V^T V))^(1/4), denominators
/// floored at epsilon_floor. Independent of the member weight.
Factor update_factor(const AffinityMatrix& affinity, const Factor& factor,
                     double epsilon_floor = 1e-12);

/// Closed-form simplex weights: a_m proportional to (tau h_m)^(1/(1-tau)).
/// Residuals are floored at epsilon_floor first.
WeightVector update_weights(std::span<const double> residuals, double tau,
                            double epsilon_floor = 1e-12);

struct AuxiliaryCertificate {
  double g_prev = 0.0;
  double g_next = 0.0;
  double f_prev = 0.0;
  double f_next = 0.0;
  bool tight = false;     // g_prev == f_prev within 1e-8 relative
  bool bounded = false;   // g_next >= f_next - 1e-8
  bool descended = false; // g_next <= g_prev + 1e-10
  // Smallest diagonal Hessian entry of g at factor_next; g is separable, so
  // positivity everywhere means strict convexity.
  double min_curvature = 0.0;
  // Largest |dg/dV_ij| at factor_next relative to the scale of its two
  // terms. Zero (up to rounding) when factor_next is the update of factor_prev.
  double stationarity = 0.0;
  bool ok = false;        // tight && bounded && descended
};

/// Evaluates the majorizer g built around factor_prev at factor_prev and
/// factor_next, together with f = a^tau ||S - V V^T||_F^2 at both.
AuxiliaryCertificate certify_auxiliary(const AffinityMatrix& affinity, const Factor& factor_prev,
                                       const Factor& factor_next, double alpha_m, double tau);

/// Alternates all b factor updates with one weight update until the joint
/// variable change drops below config.tol or max_inner_iters is reached.
EnsembleState solve_inner(const AffinityMatrix& affinity, std::vector<Factor> factors_init,
                          const SolverConfig& config = {});

}  // namespace s3nmf

#endif  // S3NMF_SOLVER_HPP_
