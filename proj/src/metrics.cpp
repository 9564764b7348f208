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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nsl/rng.hpp"

namespace nsl {

void SampleSet::validate() const {
  require(!samples.empty(), "sample set: at least one sample required");
  const Index d = samples.front().size();
  for (const auto& s : samples) require(s.size() == d, "sample set: ragged samples");
  if (reference) require(reference->size() == d, "sample set: reference length mismatch");
}

double psnr(const DataVector& x, const DataVector& ref, double range) {
  require(x.size() == ref.size(), "psnr: length mismatch");
  require(x.size() >= 1, "psnr: empty vectors");
  require(range > 0.0, "psnr: range must be positive");
  const double mse = (x - ref).squaredNorm() / static_cast<double>(x.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(range * range / mse);
}

int default_cluster_count(std::size_t n_samples) {
  return static_cast<int>(std::min<std::size_t>(6, n_samples / 2));
}

KMeansResult kmeans(std::span<const DataVector> points, int k, std::uint64_t seed,
                    int restarts, int max_iter) {
  const auto n = static_cast<Index>(points.size());
  require(k >= 1 && k <= n, "kmeans: need 1 <= k <= number of points");
  const Index d = points.front().size();
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();

  for (int r = 0; r < restarts; ++r) {
    const NormalStream stream(seed, static_cast<std::uint32_t>(r), StreamPurpose::clustering);
    std::uint64_t draw = 0;
    auto uniform = [&] { return stream.uniform(draw++, 1)[0]; };

    // k-means++ seeding.
    Matrix centroids(k, d);
    std::vector<double> dist2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    auto first = std::min<Index>(static_cast<Index>(uniform() * static_cast<double>(n)), n - 1);
    centroids.row(0) = points[static_cast<std::size_t>(first)].transpose();
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (Index i = 0; i < n; ++i) {
        const double dd = (points[static_cast<std::size_t>(i)].transpose() - centroids.row(c - 1)).squaredNorm();
        dist2[static_cast<std::size_t>(i)] = std::min(dist2[static_cast<std::size_t>(i)], dd);
        total += dist2[static_cast<std::size_t>(i)];
      }
      Index pick = n - 1;
      if (total > 0.0) {
        double target = uniform() * total;
        for (Index i = 0; i < n; ++i) {
          target -= dist2[static_cast<std::size_t>(i)];
          if (target <= 0.0) {
            pick = i;
            break;
          }
        }
      } else {
        pick = std::min<Index>(static_cast<Index>(uniform() * static_cast<double>(n)), n - 1);
      }
      centroids.row(c) = points[static_cast<std::size_t>(pick)].transpose();
    }

    std::vector<int> assign(static_cast<std::size_t>(n), -1);
    double inertia = 0.0;
    for (int it = 0; it < max_iter; ++it) {
      bool changed = false;
      inertia = 0.0;
      for (Index i = 0; i < n; ++i) {
        int arg = 0;
        double bestd = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
          const double dd = (points[static_cast<std::size_t>(i)].transpose() - centroids.row(c)).squaredNorm();
          if (dd < bestd) {
            bestd = dd;
            arg = c;
          }
        }
        inertia += bestd;
        if (assign[static_cast<std::size_t>(i)] != arg) {
          assign[static_cast<std::size_t>(i)] = arg;
          changed = true;
        }
      }
      if (!changed && it > 0) break;
      Matrix sums = Matrix::Zero(k, d);
      std::vector<int> counts(static_cast<std::size_t>(k), 0);
      for (Index i = 0; i < n; ++i) {
        sums.row(assign[static_cast<std::size_t>(i)]) += points[static_cast<std::size_t>(i)].transpose();
        ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
      }
      for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) {
          centroids.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
          continue;
        }
        // Empty cluster: move it to the point farthest from its centroid.
        Index far = 0;
        double fard = -1.0;
        for (Index i = 0; i < n; ++i) {
          const double dd = (points[static_cast<std::size_t>(i)].transpose() -
                             centroids.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
          if (dd > fard) {
            fard = dd;
            far = i;
          }
        }
        centroids.row(c) = points[static_cast<std::size_t>(far)].transpose();
        changed = true;
      }
    }
    if (inertia < best.inertia) {
      best.inertia = inertia;
      best.centroids = centroids;
      best.assignment = assign;
    }
  }
  return best;
}

double diversity_score(const SampleSet& set, int k, std::uint64_t seed) {
  set.validate();
  const auto n = set.samples.size();
  require(k >= 2, "diversity_score: k must be >= 2");
  require(n >= static_cast<std::size_t>(k) + 1, "diversity_score: need at least k + 1 samples");
  bool distinct = false;
  for (const auto& s : set.samples) distinct = distinct || s != set.samples.front();
  if (!distinct) throw DegenerateSetError("diversity_score: all samples are identical");

  const auto km = kmeans(set.samples, k, seed);
  double intra = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    intra += (set.samples[i].transpose() - km.centroids.row(km.assignment[i])).norm();
  }
  intra /= static_cast<double>(n);
  double inter = 0.0;
  int pairs = 0;
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      inter += (km.centroids.row(a) - km.centroids.row(b)).norm();
      ++pairs;
    }
  }
  inter /= pairs;
  if (!(intra > 0.0)) throw DegenerateSetError("diversity_score: zero intra-cluster distance");
  return inter / intra;
}

double avg_pairwise_cosine(const SampleSet& set) {
  set.validate();
  require(set.samples.size() >= 2, "avg_pairwise_cosine: need at least 2 samples");
  std::vector<double> norms;
  for (const auto& s : set.samples) {
    norms.push_back(s.norm());
    require(norms.back() > 0.0, "avg_pairwise_cosine: zero-norm sample");
  }
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    for (std::size_t j = i + 1; j < set.samples.size(); ++j) {
      sum += set.samples[i].dot(set.samples[j]) / (norms[i] * norms[j]);
      ++pairs;
    }
  }
  return std::clamp(sum / static_cast<double>(pairs), -1.0, 1.0);
}

}  // namespace nsl
