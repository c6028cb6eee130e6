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

#include "s3nmf/solver.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <string>

namespace s3nmf {
namespace {

Matrix multiplicative_step(const Matrix& s, const Matrix& v, double epsilon_floor) {
  const Matrix numer = s * v;
  const Matrix denom = v * (v.transpose() * v);
  Matrix out(v.rows(), v.cols());
  for (Index j = 0; j < v.cols(); ++j) {
    for (Index i = 0; i < v.rows(); ++i) {
      const double ratio = numer(i, j) / std::max(denom(i, j), epsilon_floor);
      const double next = v(i, j) * std::sqrt(std::sqrt(ratio));
      if (!std::isfinite(next)) {
        throw NumericError("non-finite factor update at (" + std::to_string(i) + "," +
                           std::to_string(j) + ")");
      }
      out(i, j) = next;
    }
  }
  return out;
}

void check_strictly_positive(const Factor& f, const char* what) {
  if (!(f.values().minCoeff() > 0.0)) {
    throw CertificateError(std::string(what) + " must be strictly positive");
  }
}

}  // namespace

void validate(const SolverConfig& config) {
  if (!(config.tau > 1.0)) throw ParameterError("tau must exceed 1");
  if (!(config.tol > 0.0)) throw ParameterError("tol must be positive");
  if (!(config.epsilon_floor > 0.0)) throw ParameterError("epsilon_floor must be positive");
  if (config.max_inner_iters < 1) throw ParameterError("max_inner_iters must be at least 1");
}

std::vector<Factor> init_factors(Index n, Index c, Index b, std::uint64_t seed,
                                 double epsilon_floor) {
  if (c < 2 || c > n) throw ParameterError("need 2 <= c <= n");
  if (b < 2) throw ParameterError("ensemble size must be at least 2");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 engine(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Factor> out;
  out.reserve(static_cast<std::size_t>(b));
  for (Index m = 0; m < b; ++m) {
    Matrix v(n, c);
    for (Index j = 0; j < c; ++j) {
      for (Index i = 0; i < n; ++i) {
        // 1 - u lies in (0, 1].
        v(i, j) = epsilon_floor + (1.0 - epsilon_floor) * (1.0 - unit(engine));
      }
    }
    out.emplace_back(std::move(v));
  }
  return out;
}

Factor update_factor(const AffinityMatrix& affinity, const Factor& factor, double epsilon_floor) {
  if (factor.samples() != affinity.size()) throw ShapeError("factor/affinity size mismatch");
  return Factor(multiplicative_step(affinity.values(), factor.values(), epsilon_floor));
}

WeightVector update_weights(std::span<const double> residuals, double tau, double epsilon_floor) {
  if (!(tau > 1.0)) throw ParameterError("tau must exceed 1");
  if (residuals.empty()) throw ParameterError("no residuals");
  const Index b = static_cast<Index>(residuals.size());
  const double exponent = 1.0 / (1.0 - tau);
  // Log domain keeps tiny residuals from overflowing the power.
  Vector logw(b);
  for (Index m = 0; m < b; ++m) {
    const double h = residuals[static_cast<std::size_t>(m)];
    if (!(h >= 0.0) || !std::isfinite(h)) {
      throw NumericError("residual " + std::to_string(m) + " is negative or non-finite");
    }
    logw(m) = exponent * std::log(tau * std::max(h, epsilon_floor));
  }
  const double top = logw.maxCoeff();
  Vector w(b);
  for (Index m = 0; m < b; ++m) {
    w(m) = std::max(std::exp(logw(m) - top), std::numeric_limits<double>::min());
  }
  w /= w.sum();
  return WeightVector(std::move(w));
}

AuxiliaryCertificate certify_auxiliary(const AffinityMatrix& affinity, const Factor& factor_prev,
                                       const Factor& factor_next, double alpha_m, double tau) {
  if (factor_prev.samples() != affinity.size() || factor_next.samples() != affinity.size() ||
      factor_prev.clusters() != factor_next.clusters()) {
    throw ShapeError("certificate operands disagree in shape");
  }
  check_strictly_positive(factor_prev, "expansion point");
  const Matrix& s = affinity.values();
  const Matrix& vt = factor_prev.values();
  const Matrix& v = factor_next.values();
  const Index n = vt.rows();
  const Index c = vt.cols();
  const double scale = std::pow(alpha_m, tau);

  const Matrix gram = vt * vt.transpose();
  const double s_norm = s.squaredNorm();

  // g(x) for x = v, expanded around vt, summed literally over i, j, k.
  auto majorizer = [&](const Matrix& x) {
    double quartic = 0.0;
    double logpart = 0.0;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < c; ++j) {
        const double ratio_ij = x(i, j) / vt(i, j);
        const double q = ratio_ij * ratio_ij * ratio_ij * ratio_ij * vt(i, j);
        for (Index k = 0; k < n; ++k) {
          quartic += gram(i, k) * vt(k, j) * q;
          if (s(i, k) == 0.0) continue;
          const double ratio = (x(i, j) * x(k, j)) / (vt(i, j) * vt(k, j));
          logpart += s(i, k) * vt(i, j) * vt(k, j) * (1.0 + std::log(ratio));
        }
      }
    }
    return scale * (s_norm + quartic - 2.0 * logpart);
  };

  AuxiliaryCertificate cert;
  cert.f_prev = scale * residual(affinity, factor_prev);
  cert.f_next = scale * residual(affinity, factor_next);
  cert.g_prev = majorizer(vt);
  cert.g_next = majorizer(v);
  cert.tight = std::abs(cert.g_prev - cert.f_prev) <= 1e-8 * std::abs(cert.f_prev);
  cert.bounded = cert.g_next >= cert.f_next - 1e-8;
  cert.descended = cert.g_next <= cert.g_prev + 1e-10;
  cert.ok = cert.tight && cert.bounded && cert.descended;

  const Matrix cubic = gram * vt;
  const Matrix sv = s * vt;
  cert.min_curvature = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < c; ++j) {
      const double r = v(i, j) / vt(i, j);
      const double up = 4.0 * scale * cubic(i, j) * r * r * r;
      const double down = 4.0 * scale * sv(i, j) * vt(i, j) / v(i, j);
      const double mag = up + down;
      if (mag > 0.0) cert.stationarity = std::max(cert.stationarity, std::abs(up - down) / mag);
      const double curv = 12.0 * scale * cubic(i, j) * r * r / vt(i, j) +
                          4.0 * scale * sv(i, j) * vt(i, j) / (v(i, j) * v(i, j));
      cert.min_curvature = std::min(cert.min_curvature, curv);
    }
  }
  return cert;
}

EnsembleState solve_inner(const AffinityMatrix& affinity, std::vector<Factor> factors_init,
                          const SolverConfig& config) {
  validate(config);
  const Index b = static_cast<Index>(factors_init.size());
  if (b < 2) throw ParameterError("ensemble size must be at least 2");
  const Index n = affinity.size();
  for (Index m = 0; m < b; ++m) {
    const Factor& f = factors_init[static_cast<std::size_t>(m)];
    if (f.samples() != n || f.clusters() != factors_init.front().clusters()) {
      throw ShapeError("initial factor " + std::to_string(m) + " has the wrong shape");
    }
    if (!(f.values().minCoeff() > 0.0)) {
      throw ParameterError("initial factor " + std::to_string(m) + " is not strictly positive");
    }
  }

  const Matrix& s = affinity.values();
  std::vector<Matrix> current;
  current.reserve(static_cast<std::size_t>(b));
  for (Factor& f : factors_init) current.push_back(f.values());

  std::vector<double> h(static_cast<std::size_t>(b));
  for (Index m = 0; m < b; ++m) {
    h[static_cast<std::size_t>(m)] = (s - current[m] * current[m].transpose()).squaredNorm();
  }
  WeightVector alpha = config.learn_weights
                           ? update_weights(h, config.tau, config.epsilon_floor)
                           : WeightVector::uniform(b);

  EnsembleState state;
  state.objective_history.push_back(objective_from_residuals(h, alpha, config.tau));

  std::vector<Matrix> next(static_cast<std::size_t>(b));
  std::vector<double> h_next(static_cast<std::size_t>(b));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(b));

  for (int t = 1; t <= config.max_inner_iters; ++t) {
#pragma omp parallel for schedule(static)
    for (Index m = 0; m < b; ++m) {
      const auto mi = static_cast<std::size_t>(m);
      try {
        next[mi] = multiplicative_step(s, current[mi], config.epsilon_floor);
        h_next[mi] = (s - next[mi] * next[mi].transpose()).squaredNorm();
        if (!std::isfinite(h_next[mi])) throw NumericError("non-finite residual");
      } catch (...) {
        errors[mi] = std::current_exception();
      }
    }
    for (Index m = 0; m < b; ++m) {
      if (!errors[static_cast<std::size_t>(m)]) continue;
      try {
        std::rethrow_exception(errors[static_cast<std::size_t>(m)]);
      } catch (const std::exception& e) {
        throw NumericError("member " + std::to_string(m) + ", inner iteration " +
                           std::to_string(t) + ": " + e.what());
      }
    }

    if (config.certify) {
      for (Index m = 0; m < b; ++m) {
        const auto cert = certify_auxiliary(affinity, Factor(current[m]), Factor(next[m]),
                                            alpha[m], config.tau);
        if (!cert.ok) {
          throw CertificateError("auxiliary certificate failed for member " + std::to_string(m) +
                                 " at inner iteration " + std::to_string(t));
        }
      }
    }

    WeightVector alpha_next = config.learn_weights
                                  ? update_weights(h_next, config.tau, config.epsilon_floor)
                                  : alpha;

    DescentStep step;
    step.before = objective_from_residuals(h, alpha, config.tau);
    step.after_factors = objective_from_residuals(h_next, alpha, config.tau);
    step.after_weights = objective_from_residuals(h_next, alpha_next, config.tau);
    state.descent.push_back(step);
    state.objective_history.push_back(step.after_weights);

    double delta = (alpha_next.values() - alpha.values()).cwiseAbs().maxCoeff();
    for (Index m = 0; m < b; ++m) {
      delta = std::max(delta, (next[m] - current[m]).cwiseAbs().maxCoeff());
    }

    std::swap(current, next);
    std::swap(h, h_next);
    alpha = std::move(alpha_next);
    state.iterations = t;
    if (delta < config.tol) {
      state.converged = true;
      break;
    }
  }

  state.factors.reserve(static_cast<std::size_t>(b));
  for (Matrix& v : current) state.factors.emplace_back(std::move(v));
  state.weights = std::move(alpha);
  state.affinity = affinity;
  state.residuals = std::move(h);
  return state;
}

}  // namespace s3nmf
