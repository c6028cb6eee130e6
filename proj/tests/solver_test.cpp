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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "s3nmf/certify.hpp"
#include "s3nmf/metrics.hpp"
#include "s3nmf/pipeline.hpp"
#include "s3nmf/solver.hpp"

namespace s3nmf {
namespace {

Matrix m1(double v) { return Matrix::Constant(1, 1, v); }

TEST(InitFactors, Deterministic) {
  const auto a = init_factors(10, 3, 4, 42);
  const auto b = init_factors(10, 3, 4, 42);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t m = 0; m < a.size(); ++m) EXPECT_EQ(a[m].values(), b[m].values());
}

TEST(InitFactors, StrictlyPositive) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const Factor& f : init_factors(15, 3, 5, seed)) {
      EXPECT_GT(f.values().minCoeff(), 0.0);
      EXPECT_LE(f.values().maxCoeff(), 1.0);
    }
  }
}

TEST(InitFactors, SeedsDiffer) {
  const auto a = init_factors(10, 3, 4, 7);
  const auto b = init_factors(10, 3, 4, 8);
  bool differ = false;
  for (std::size_t m = 0; m < a.size(); ++m) differ = differ || a[m].values() != b[m].values();
  EXPECT_TRUE(differ);
}

TEST(InitFactors, MembersDiffer) {
  const auto a = init_factors(10, 3, 4, 7);
  EXPECT_NE(a[0].values(), a[1].values());
}

TEST(InitFactors, RejectsBadShape) {
  EXPECT_THROW(init_factors(5, 1, 4, 0), ParameterError);
  EXPECT_THROW(init_factors(5, 6, 4, 0), ParameterError);
  EXPECT_THROW(init_factors(5, 2, 1, 0), ParameterError);
}

TEST(UpdateFactor, FixedPoint) {
  std::mt19937_64 rng(1);
  const Matrix v = testing::random_positive(6, 2, rng);
  const Matrix s = v * v.transpose();
  const Factor next = update_factor(AffinityMatrix(s), Factor(v));
  EXPECT_LE((next.values() - v).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(UpdateFactor, ScalarExample) {
  const AffinityMatrix s(m1(4));
  Factor v(m1(1));
  v = update_factor(s, v);
  EXPECT_NEAR(v.values()(0, 0), std::pow(4.0, 0.25), 1e-15);
  EXPECT_NEAR(v.values()(0, 0), 1.41421356, 1e-8);
  for (int t = 0; t < 200; ++t) v = update_factor(s, v);
  EXPECT_NEAR(v.values()(0, 0), 2.0, 1e-12);
}

TEST(UpdateFactor, PreservesZeros) {
  std::mt19937_64 rng(2);
  Matrix v = testing::random_positive(5, 2, rng);
  v(1, 0) = 0.0;
  v(3, 1) = 0.0;
  const Factor next = update_factor(AffinityMatrix(testing::random_symmetric_nonnegative(5, rng)), Factor(v));
  EXPECT_EQ(next.values()(1, 0), 0.0);
  EXPECT_EQ(next.values()(3, 1), 0.0);
}

TEST(UpdateFactor, MinimizesMajorizerForAnyWeight) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const AffinityMatrix s(testing::random_symmetric_nonnegative(6, rng));
    const Factor prev(testing::random_positive(6, 2, rng));
    const Factor next = update_factor(s, prev);
    for (double alpha : {0.1, 0.9}) {
      const auto cert = certify_auxiliary(s, prev, next, alpha, 2.0);
      EXPECT_TRUE(cert.ok);
      EXPECT_LE(cert.stationarity, 1e-12);
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 2; ++j) {
          for (double step : {-1e-4, 1e-4}) {
            Matrix moved = next.values();
            moved(i, j) *= 1.0 + step;
            const auto other = certify_auxiliary(s, prev, Factor(moved), alpha, 2.0);
            EXPECT_GE(other.g_next, cert.g_next);
          }
        }
      }
    }
  }
}

TEST(UpdateWeights, Examples) {
  const std::vector<double> even{1, 1};
  const WeightVector a = update_weights(even, 2.0);
  EXPECT_DOUBLE_EQ(a[0], 0.5);
  EXPECT_DOUBLE_EQ(a[1], 0.5);
  const std::vector<double> h{1, 3};
  const WeightVector b = update_weights(h, 2.0);
  EXPECT_NEAR(b[0], 0.75, 1e-15);
  EXPECT_NEAR(b[1], 0.25, 1e-15);
  const WeightVector c = update_weights(h, 10.0);
  EXPECT_NEAR(c[0], 0.5304791709083384, 1e-15);
  EXPECT_NEAR(c[1], 0.46952082909166154, 1e-15);
}

TEST(UpdateWeights, SimplexAndAntiMonotone) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::uniform_real_distribution<double> tau_dist(1.1, 8.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> h(2 + t % 9);
    for (double& x : h) x = u(rng);
    const double tau = tau_dist(rng);
    const WeightVector w = update_weights(h, tau);
    EXPECT_NEAR(w.values().sum(), 1.0, 1e-12);
    EXPECT_GT(w.values().minCoeff(), 0.0);
    for (std::size_t i = 0; i < h.size(); ++i) {
      for (std::size_t j = 0; j < h.size(); ++j) {
        if (h[i] < h[j]) EXPECT_GT(w[static_cast<Index>(i)], w[static_cast<Index>(j)]);
      }
    }
  }
}

TEST(UpdateWeights, ZeroResidualDoesNotCollapse) {
  const std::vector<double> h{0.0, 1.0};
  const WeightVector w = update_weights(h, 2.0);
  EXPECT_GT(w[1], 0.0);
  EXPECT_NEAR(w.values().sum(), 1.0, 1e-12);
}

TEST(UpdateWeights, RejectsBadInput) {
  const std::vector<double> h{1.0, 2.0};
  EXPECT_THROW(update_weights(h, 1.0), ParameterError);
  const std::vector<double> bad{1.0, -2.0};
  EXPECT_THROW(update_weights(bad, 2.0), NumericError);
}

TEST(UpdateWeights, GlobalMinimizerOnSimplex) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.5, 5.0);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int inst = 0; inst < 20; ++inst) {
    const int b = 2 + inst % 6;
    const double tau = 1.5 + 0.25 * (inst % 8);
    std::vector<double> h(static_cast<std::size_t>(b));
    for (double& x : h) x = u(rng);
    const WeightVector w = update_weights(h, tau);
    const double base = objective_from_residuals(h, w, tau);
    for (int p = 0; p < 50; ++p) {
      Vector d(b);
      for (int m = 0; m < b; ++m) d(m) = g(rng);
      d.array() -= d.mean();
      d.normalize();
      const Vector moved = w.values() + 1e-3 * d;
      double value = 0.0;
      for (int m = 0; m < b; ++m) value += std::pow(moved(m), tau) * h[static_cast<std::size_t>(m)];
      EXPECT_GE(value, base);
    }
  }
}

TEST(Certificate, EqualityAtExpansionPoint) {
  std::mt19937_64 rng(5);
  const AffinityMatrix s(testing::random_symmetric_nonnegative(5, rng));
  const Factor v(testing::random_positive(5, 2, rng));
  const auto cert = certify_auxiliary(s, v, v, 0.4, 2.0);
  EXPECT_NEAR(cert.g_prev, cert.f_prev, 1e-12 * cert.f_prev);
  EXPECT_EQ(cert.g_next, cert.g_prev);
  EXPECT_EQ(cert.f_next, cert.f_prev);
  EXPECT_TRUE(cert.ok);
}

TEST(Certificate, HoldsAtUpdate) {
  std::mt19937_64 rng(6);
  const AffinityMatrix s(testing::random_symmetric_nonnegative(5, rng));
  const Factor v(testing::random_positive(5, 2, rng));
  const auto cert = certify_auxiliary(s, v, update_factor(s, v), 0.7, 2.0);
  EXPECT_TRUE(cert.ok);
  EXPECT_GT(cert.min_curvature, 0.0);
  EXPECT_LE(cert.f_next, cert.f_prev);
}

TEST(Certificate, BoundIsGlobal) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t) {
    const AffinityMatrix s(testing::random_symmetric_nonnegative(6, rng));
    const Factor v(testing::random_positive(6, 3, rng));
    const auto cert = certify_auxiliary(s, v, Factor(v.values() * 10.0), 0.3, 3.0);
    EXPECT_TRUE(cert.bounded);
    EXPECT_GE(cert.g_next, cert.f_next);
  }
}

TEST(Certificate, RejectsZeroExpansionPoint) {
  Matrix v = Matrix::Ones(3, 2);
  v(0, 0) = 0.0;
  const AffinityMatrix s(Matrix::Ones(3, 3));
  EXPECT_THROW(certify_auxiliary(s, Factor(v), Factor(Matrix::Ones(3, 2)), 0.5, 2.0), CertificateError);
}

TEST(CertificateSuite, PassesAndCatchesFlippedUpdate) {
  CertifyOptions options;
  const auto report = run_certificate_suite(options);
  EXPECT_EQ(report.instances, 50);
  EXPECT_EQ(report.certified, 50);
  EXPECT_TRUE(report.ok());
  EXPECT_LE(report.worst_tightness, 1e-8);
  EXPECT_GE(report.worst_bound_slack, -1e-8);

  options.instances = 10;
  options.flip_update = true;
  const auto flipped = run_certificate_suite(options);
  EXPECT_FALSE(flipped.ok());
  EXPECT_LT(flipped.certified, 10);
  ASSERT_FALSE(flipped.failures.empty());
  EXPECT_TRUE(flipped.failures.front().replay.contains("V_prev"));
}

TEST(SolveInner, RecoversBlocks) {
  const AffinityMatrix s(testing::two_blocks(3, 3));
  const Partition truth({0, 0, 0, 1, 1, 1}, 2);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const EnsembleState state = solve_inner(s, init_factors(6, 2, 2, seed));
    std::vector<Partition> parts;
    for (const Factor& f : state.factors) parts.push_back(harden(f));
    for (const Partition& p : parts) EXPECT_EQ(acc(p, truth), 1.0) << "seed " << seed;
    EXPECT_EQ(anmi(parts), 1.0) << "seed " << seed;
  }
}

TEST(SolveInner, FixedPointConvergesImmediately) {
  Matrix v(4, 2);
  v << 1, 0.1, 0.9, 0.2, 0.1, 1, 0.2, 0.8;
  const AffinityMatrix s(v * v.transpose());
  const EnsembleState state = solve_inner(s, {Factor(v), Factor(v), Factor(v)});
  EXPECT_TRUE(state.converged);
  EXPECT_EQ(state.iterations, 1);
  for (Index m = 0; m < 3; ++m) EXPECT_EQ(state.weights[m], 1.0 / 3.0);
}

TEST(SolveInner, MonotoneDescent) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const AffinityMatrix s(testing::random_symmetric_nonnegative(20, rng));
    SolverConfig config;
    config.max_inner_iters = 100;
    const EnsembleState state = solve_inner(s, init_factors(20, 3, 4, seed), config);
    ASSERT_EQ(state.objective_history.size(), state.descent.size() + 1);
    for (std::size_t t = 1; t < state.objective_history.size(); ++t) {
      EXPECT_LE(state.objective_history[t], state.objective_history[t - 1] + 1e-10);
    }
    for (const DescentStep& step : state.descent) {
      EXPECT_LE(step.after_factors, step.before + 1e-10);
      EXPECT_LE(step.after_weights, step.after_factors + 1e-10);
    }
  }
}

TEST(SolveInner, KktAtConvergence) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(100 + seed);
    const AffinityMatrix s(testing::random_symmetric_nonnegative(10, rng));
    SolverConfig config;
    config.tol = 1e-10;
    config.max_inner_iters = 50000;
    const EnsembleState state = solve_inner(s, init_factors(10, 2, 2, seed), config);
    EXPECT_TRUE(state.converged);
    for (const Factor& f : state.factors) {
      const Matrix& v = f.values();
      const Matrix sv = s.values() * v;
      const Matrix grad = 4.0 * (v * (v.transpose() * v) - sv);
      for (Index i = 0; i < v.rows(); ++i) {
        for (Index j = 0; j < v.cols(); ++j) {
          if (v(i, j) > 1e-6) EXPECT_LE(std::abs(grad(i, j)), 1e-2 * (1.0 + std::abs(sv(i, j))));
        }
      }
    }
  }
}

TEST(SolveInner, WeightsMatchClosedForm) {
  std::mt19937_64 rng(31);
  const AffinityMatrix s(testing::random_symmetric_nonnegative(12, rng));
  const EnsembleState state = solve_inner(s, init_factors(12, 3, 5, 9));
  std::vector<double> h;
  for (const Factor& f : state.factors) h.push_back(residual(s, f));
  const WeightVector expected = update_weights(h, 2.0);
  EXPECT_LE((state.weights.values() - expected.values()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SolveInner, UniformWhenWeightsFrozen) {
  std::mt19937_64 rng(32);
  const AffinityMatrix s(testing::random_symmetric_nonnegative(12, rng));
  SolverConfig config;
  config.learn_weights = false;
  const EnsembleState state = solve_inner(s, init_factors(12, 3, 4, 1), config);
  for (Index m = 0; m < 4; ++m) EXPECT_EQ(state.weights[m], 0.25);
}

TEST(SolveInner, CertifiedRunSucceeds) {
  std::mt19937_64 rng(33);
  const AffinityMatrix s(testing::random_symmetric_nonnegative(8, rng));
  SolverConfig config;
  config.certify = true;
  config.max_inner_iters = 30;
  EXPECT_NO_THROW(solve_inner(s, init_factors(8, 2, 3, 2), config));
}

TEST(SolveInner, Deterministic) {
  std::mt19937_64 rng(34);
  const AffinityMatrix s(testing::random_symmetric_nonnegative(15, rng));
  const EnsembleState a = solve_inner(s, init_factors(15, 3, 6, 4));
  const EnsembleState b = solve_inner(s, init_factors(15, 3, 6, 4));
  EXPECT_EQ(a.objective_history, b.objective_history);
  for (std::size_t m = 0; m < a.factors.size(); ++m) EXPECT_EQ(a.factors[m].values(), b.factors[m].values());
}

TEST(SolveInner, RejectsBadInput) {
  const AffinityMatrix s(testing::two_blocks(3, 3));
  std::vector<Factor> one{Factor(Matrix::Ones(6, 2))};
  EXPECT_THROW(solve_inner(s, one), ParameterError);
  std::vector<Factor> zeros{Factor(Matrix::Ones(6, 2)), Factor(Matrix::Zero(6, 2))};
  EXPECT_THROW(solve_inner(s, zeros), ParameterError);
  std::vector<Factor> wrong{Factor(Matrix::Ones(6, 2)), Factor(Matrix::Ones(5, 2))};
  EXPECT_THROW(solve_inner(s, wrong), ShapeError);
  SolverConfig config;
  config.tau = 1.0;
  EXPECT_THROW(solve_inner(s, init_factors(6, 2, 2, 0), config), ParameterError);
}

}  // namespace
}  // namespace s3nmf
