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

#include "nsl/metrics.hpp"

#include <cmath>
#include <limits>
#include <set>

#include <gtest/gtest.h>

#include "nsl/rng.hpp"

namespace nsl {
namespace {

std::vector<DataVector> normal_cloud(std::uint64_t seed, int n, Index d, double scale = 1.0,
                                     const Vector& shift = Vector()) {
  NormalStream s(seed, 0, StreamPurpose::generic);
  std::vector<DataVector> out;
  for (int i = 0; i < n; ++i) {
    Vector v = scale * s.normal(static_cast<std::uint64_t>(i), d);
    if (shift.size() == d) v += shift;
    out.push_back(v);
  }
  return out;
}

TEST(Psnr, Examples) {
  // MSE 0.04 with range 2: 10 log10(4 / 0.04) = 20.
  const Vector ref = Vector::Zero(4);
  EXPECT_NEAR(psnr(Vector::Constant(4, 0.2), ref), 20.0, 1e-12);
  Vector x(4);
  x << 0.4, 0.0, 0.0, 0.0;
  EXPECT_NEAR(psnr(x, ref), 20.0, 1e-12);
  EXPECT_NEAR(psnr(Vector::Constant(4, 0.1), ref, 1.0), 20.0, 1e-12);
}

TEST(Psnr, IdenticalIsInfinite) {
  const Vector v = Vector::LinSpaced(9, -1, 1);
  EXPECT_EQ(psnr(v, v), std::numeric_limits<double>::infinity());
}

TEST(Psnr, SymmetricAndValidated) {
  const auto a = normal_cloud(1, 2, 16);
  EXPECT_DOUBLE_EQ(psnr(a[0], a[1]), psnr(a[1], a[0]));
  EXPECT_THROW(psnr(Vector::Zero(3), Vector::Zero(4)), ContractViolation);
  EXPECT_THROW(psnr(Vector(), Vector()), ContractViolation);
  EXPECT_THROW(psnr(Vector::Zero(3), Vector::Ones(3), 0.0), ContractViolation);
}

TEST(KMeans, SeparatesTwoClumps) {
  auto pts = normal_cloud(2, 40, 2, 0.1, Vector::Constant(2, 5.0));
  const auto far = normal_cloud(3, 40, 2, 0.1, Vector::Constant(2, -5.0));
  pts.insert(pts.end(), far.begin(), far.end());
  const auto r = kmeans(pts, 2, 7);
  ASSERT_EQ(r.assignment.size(), 80u);
  for (int i = 1; i < 40; ++i) EXPECT_EQ(r.assignment[i], r.assignment[0]);
  for (int i = 41; i < 80; ++i) EXPECT_EQ(r.assignment[i], r.assignment[40]);
  EXPECT_NE(r.assignment[0], r.assignment[40]);
  EXPECT_THROW(kmeans(pts, 0, 1), ContractViolation);
  EXPECT_THROW(kmeans(pts, 81, 1), ContractViolation);
}

TEST(KMeans, Deterministic) {
  const auto pts = normal_cloud(4, 60, 3);
  const auto a = kmeans(pts, 4, 11);
  const auto b = kmeans(pts, 4, 11);
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_EQ(a.inertia, b.inertia);
}

TEST(DiversityScore, IdenticalSamplesAreDegenerate) {
  SampleSet set{std::vector<DataVector>(10, Vector::Ones(3)), std::nullopt};
  EXPECT_THROW(diversity_score(set, 2), DegenerateSetError);
}

TEST(DiversityScore, SeparatedClustersScoreHigh) {
  auto pts = normal_cloud(5, 50, 4, 0.05, Vector::Constant(4, 3.0));
  const auto other = normal_cloud(6, 50, 4, 0.05, Vector::Constant(4, -3.0));
  pts.insert(pts.end(), other.begin(), other.end());
  const double clustered = diversity_score(SampleSet{pts, std::nullopt}, 2, 1);
  EXPECT_GT(clustered, 50.0);
  const double blob = diversity_score(SampleSet{normal_cloud(7, 100, 4), std::nullopt}, 2, 1);
  EXPECT_LT(blob, clustered);
}

TEST(DiversityScore, RigidAndScaleInvariant) {
  const auto pts = normal_cloud(8, 80, 2);
  const double base = diversity_score(SampleSet{pts, std::nullopt}, 4, 3);
  const double c = std::cos(0.7), s = std::sin(0.7);
  Matrix rot(2, 2);
  rot << c, -s, s, c;
  std::vector<DataVector> moved;
  for (const auto& p : pts) moved.push_back(3.5 * rot * p + Vector::Constant(2, 9.0));
  EXPECT_NEAR(diversity_score(SampleSet{moved, std::nullopt}, 4, 3), base, 1e-9 * base);
}

TEST(DiversityScore, Validation) {
  const auto pts = normal_cloud(9, 5, 2);
  EXPECT_THROW(diversity_score(SampleSet{pts, std::nullopt}, 1), ContractViolation);
  EXPECT_THROW(diversity_score(SampleSet{pts, std::nullopt}, 5), ContractViolation);
  EXPECT_THROW(diversity_score(SampleSet{{}, std::nullopt}, 2), ContractViolation);
}

TEST(DefaultClusterCount, Examples) {
  EXPECT_EQ(default_cluster_count(3), 1);
  EXPECT_EQ(default_cluster_count(10), 5);
  EXPECT_EQ(default_cluster_count(12), 6);
  EXPECT_EQ(default_cluster_count(1000), 6);
}

TEST(AvgPairwiseCosine, Examples) {
  const Vector e0 = Vector::Unit(2, 0), e1 = Vector::Unit(2, 1);
  EXPECT_NEAR(avg_pairwise_cosine(SampleSet{{e0, 2.0 * e0, 0.5 * e0}, std::nullopt}), 1.0, 1e-15);
  EXPECT_NEAR(avg_pairwise_cosine(SampleSet{{e0, e1}, std::nullopt}), 0.0, 1e-15);
  EXPECT_NEAR(avg_pairwise_cosine(SampleSet{{e0, -e0}, std::nullopt}), -1.0, 1e-15);
  // Pairs: (e0, e1) 0, (e0, -e0) -1, (e1, -e0) 0.
  EXPECT_NEAR(avg_pairwise_cosine(SampleSet{{e0, e1, -e0}, std::nullopt}), -1.0 / 3.0, 1e-15);
}

TEST(AvgPairwiseCosine, ScaleInvariantAndValidated) {
  const auto pts = normal_cloud(10, 20, 5);
  std::vector<DataVector> scaled;
  for (std::size_t i = 0; i < pts.size(); ++i) scaled.push_back((1.0 + static_cast<double>(i)) * pts[i]);
  EXPECT_NEAR(avg_pairwise_cosine(SampleSet{pts, std::nullopt}),
              avg_pairwise_cosine(SampleSet{scaled, std::nullopt}), 1e-13);
  EXPECT_THROW(avg_pairwise_cosine(SampleSet{{Vector::Ones(2), Vector::Zero(2)}, std::nullopt}),
               ContractViolation);
  EXPECT_THROW(avg_pairwise_cosine(SampleSet{{Vector::Ones(2)}, std::nullopt}), ContractViolation);
  EXPECT_THROW(avg_pairwise_cosine(SampleSet{{Vector::Ones(2), Vector::Ones(3)}, std::nullopt}),
               ContractViolation);
}

}  // namespace
}  // namespace nsl
