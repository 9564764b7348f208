// Copyright 2026 The nslangevin Authors
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

#include "nsl/noise_core.hpp"

#include <cmath>
#include <thread>

#include <gtest/gtest.h>

#include "nsl/benchmarks.hpp"
#include "nsl/rng.hpp"

namespace nsl {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TEST(GenerativeMap, AffinePullbackIsTranspose) {
  Matrix m(2, 2);
  m << 2, 0, 0, 3;
  const auto map = GenerativeMap::affine(m, Vector::Zero(2));
  EXPECT_EQ(map.pullback(vec({0.3, -0.7}), vec({1, 1})), vec({2, 3}));
}

TEST(GenerativeMap, IdentityPullback) {
  const auto map = GenerativeMap::identity(2);
  EXPECT_EQ(map.pullback(vec({1, 2}), vec({5, -1})), vec({5, -1}));
  EXPECT_EQ(map.apply(vec({1, 2})), vec({1, 2}));
}

TEST(GenerativeMap, TanhLayerAtOrigin) {
  const auto map = GenerativeMap::mlp({DenseLayer{Matrix::Identity(2, 2), Vector::Zero(2)}});
  EXPECT_EQ(map.pullback(vec({0, 0}), vec({1, 0})), vec({1, 0}));
}

TEST(GenerativeMap, MlpApplyMatchesHandComputation) {
  Matrix w1(3, 2);
  w1 << 0.5, -1.0, 0.2, 0.3, -0.4, 0.8;
  Vector b1 = vec({0.1, -0.2, 0.05});
  Matrix w2(2, 3);
  w2 << 1.0, 0.5, -0.5, -0.3, 0.7, 0.2;
  Vector b2 = vec({0.0, 0.3});
  const auto map = GenerativeMap::mlp({{w1, b1}, {w2, b2}});
  const Vector x = vec({0.4, -0.9});
  const Vector h = (w1 * x + b1).array().tanh().matrix();
  const Vector expect = (w2 * h + b2).array().tanh().matrix();
  EXPECT_LT((map.apply(x) - expect).norm(), 1e-15);
}

TEST(GenerativeMap, RejectsBadShapes) {
  EXPECT_THROW(GenerativeMap::affine(Matrix::Identity(2, 3), Vector::Zero(2)), ContractViolation);
  EXPECT_THROW(GenerativeMap::affine(Matrix::Identity(2, 2), Vector::Zero(3)), ContractViolation);
  // Output width must return to the input width.
  EXPECT_THROW(GenerativeMap::mlp({DenseLayer{Matrix::Identity(3, 2), Vector::Zero(3)}}), ContractViolation);
  const auto map = GenerativeMap::identity(2);
  EXPECT_THROW(map.apply(Vector::Zero(3)), ContractViolation);
  EXPECT_THROW(map.pullback(Vector::Zero(2), Vector::Zero(3)), ContractViolation);
}

TEST(GenerativeMap, NfePerEval) {
  const auto inner = GenerativeMap::random_mlp(3, {4}, 1);
  EXPECT_EQ(GenerativeMap::identity(3).nfe_per_eval(), 1);
  EXPECT_EQ(inner.nfe_per_eval(), 1);
  EXPECT_EQ(make_two_step_map(inner, 2, 0.5).nfe_per_eval(), 2);
}

TEST(CheckPullbackFd, AffineIsExact) {
  const auto maps = bench::gradient_maps();
  const NormalStream s(1, 0, StreamPurpose::generic);
  EXPECT_LT(check_pullback_fd(maps[0].map, s.normal(0, 16), s.normal(1, 16)), 1e-8);
}

// Every built-in map at 100 seeded (x1, v) pairs against central differences.
TEST(CheckPullbackFd, AllMapsHundredPoints) {
  for (const auto& m : bench::gradient_maps()) {
    for (int i = 0; i < 100; ++i) {
      const NormalStream s(1000 + static_cast<std::uint64_t>(i), 0, StreamPurpose::generic);
      const double err = check_pullback_fd(m.map, s.normal(0, 16), s.normal(1, 16), 1e-5);
      ASSERT_LT(err, 1e-5) << m.name << " point " << i;
    }
  }
}

TEST(CheckPullbackFd, RejectsNonPositiveStep) {
  const auto map = GenerativeMap::identity(2);
  EXPECT_THROW(check_pullback_fd(map, Vector::Zero(2), Vector::Ones(2), 0.0), ContractViolation);
}

TEST(TwoStep, MixNearOneOnIdentityIsIdentity) {
  const auto map = make_two_step_map(GenerativeMap::identity(3), 4, 1.0 - 1e-12);
  const Vector x = vec({0.5, -2.0, 1.25});
  EXPECT_LT((map.apply(x) - x).norm(), 1e-5);
}

TEST(TwoStep, MatchesDefinition) {
  const auto inner = GenerativeMap::random_mlp(4, {5}, 8);
  const auto map = make_two_step_map(inner, 21, 0.6);
  const Vector z = NormalStream(21, 0, StreamPurpose::map_noise).normal(0, 4);
  const Vector x = vec({0.1, 0.2, -0.3, 0.4});
  const Vector expect = inner.apply(0.6 * inner.apply(x) + std::sqrt(1.0 - 0.36) * z);
  EXPECT_LT((map.apply(x) - expect).norm(), 1e-15);
}

TEST(TwoStep, SameSeedSameNoise) {
  const auto inner = GenerativeMap::random_mlp(4, {5}, 8);
  const auto a = make_two_step_map(inner, 13, 0.5);
  const auto b = make_two_step_map(inner, 13, 0.5);
  EXPECT_EQ(a.as_two_step()->noise, b.as_two_step()->noise);
  EXPECT_NE(a.as_two_step()->noise, make_two_step_map(inner, 14, 0.5).as_two_step()->noise);
}

TEST(TwoStep, RepeatedEvaluationBitExact) {
  const auto map = make_two_step_map(GenerativeMap::random_mlp(6, {7}, 2), 3, 0.7);
  const Vector x = NormalStream(3, 0, StreamPurpose::generic).normal(0, 6);
  const Vector first = map.apply(x);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(map.apply(x), first);
}

TEST(TwoStep, RejectsBadMixAndInner) {
  const auto inner = GenerativeMap::identity(2);
  EXPECT_THROW(make_two_step_map(inner, 0, 0.0), ContractViolation);
  EXPECT_THROW(make_two_step_map(inner, 0, 1.0), ContractViolation);
  EXPECT_THROW(make_two_step_map(inner, 0, -0.3), ContractViolation);
  const auto nested = make_two_step_map(inner, 0, 0.5);
  EXPECT_THROW(make_two_step_map(nested, 0, 0.5), ContractViolation);
}

TEST(GenerativeMap, DeterministicAcrossThreads) {
  const auto maps = bench::gradient_maps();
  const Vector x = NormalStream(5, 0, StreamPurpose::generic).normal(0, 16);
  const Vector v = NormalStream(5, 1, StreamPurpose::generic).normal(0, 16);
  for (const auto& m : maps) {
    const Vector fx = m.map.apply(x);
    const Vector pb = m.map.pullback(x, v);
    Vector fx2;
    Vector pb2;
    std::thread t([&] {
      fx2 = m.map.apply(x);
      pb2 = m.map.pullback(x, v);
    });
    t.join();
    EXPECT_EQ(fx, fx2);
    EXPECT_EQ(pb, pb2);
  }
}

// Pushforward of N(0, I) under M z + b has mean b and covariance M M^T.
TEST(GenerativeMap, AffinePushforwardMoments) {
  Matrix m(2, 2);
  m << 1.0, 0.4, -0.3, 0.8;
  const Vector b = vec({0.1, -0.2});
  const auto map = GenerativeMap::affine(m, b);
  constexpr Index n = 100000;
  const NormalStream s(19, 0, StreamPurpose::generic);
  const Vector raw = s.normal(0, 2 * n);
  Matrix xs(2, n);
  for (Index i = 0; i < n; ++i) xs.col(i) = map.apply(raw.segment(2 * i, 2));
  const Vector mean = xs.rowwise().mean();
  const Matrix centered = xs.colwise() - mean;
  const Matrix cov = centered * centered.transpose() / static_cast<double>(n - 1);
  const Matrix sigma = m * m.transpose();
  for (Index i = 0; i < 2; ++i) {
    EXPECT_NEAR(mean[i], b[i], 3.0 * std::sqrt(sigma(i, i) / n));
    for (Index j = 0; j < 2; ++j) {
      // Var of a sample covariance entry: (S_ii S_jj + S_ij^2) / n.
      const double se = std::sqrt((sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) / n);
      EXPECT_NEAR(cov(i, j), sigma(i, j), 3.0 * se);
    }
  }
}

TEST(GenerativeMap, RandomMlpIsSeeded) {
  const auto a = GenerativeMap::random_mlp(5, {6, 4}, 10);
  const auto b = GenerativeMap::random_mlp(5, {6, 4}, 10);
  const auto c = GenerativeMap::random_mlp(5, {6, 4}, 11);
  const Vector x = Vector::LinSpaced(5, -1.0, 1.0);
  EXPECT_EQ(a.apply(x), b.apply(x));
  EXPECT_NE(a.apply(x), c.apply(x));
  EXPECT_EQ(a.as_mlp()->layers.size(), 3u);
}

}  // namespace
}  // namespace nsl
