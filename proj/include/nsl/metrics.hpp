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

#ifndef NSL_METRICS_HPP_
#define NSL_METRICS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nsl/types.hpp"

namespace nsl {

struct SampleSet {
  std::vector<DataVector> samples;
  std::optional<DataVector> reference;

  void validate() const;
};

// 10 log10(range^2 / MSE); +infinity when MSE == 0.
double psnr(const DataVector& x, const DataVector& ref, double range = 2.0);

struct KMeansResult {
  Matrix centroids;                 // k x d
  std::vector<int> assignment;
  double inertia = 0.0;
};

// Lloyd iterations from k-means++ seeds; best inertia over `restarts`.
KMeansResult kmeans(std::span<const DataVector> points, int k, std::uint64_t seed,
                    int restarts = 10, int max_iter = 200);

// min(6, floor(n / 2)).
int default_cluster_count(std::size_t n_samples);

// Mean pairwise centroid distance over mean point-to-own-centroid distance.
// Throws DegenerateSetError when the within-cluster spread is zero.
double diversity_score(const SampleSet& set, int k, std::uint64_t seed = 0);

// Mean cosine similarity over unordered pairs.
double avg_pairwise_cosine(const SampleSet& set);

}  // namespace nsl

#endif  // NSL_METRICS_HPP_
