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

// Fixed problem instances shared by the verification suites and tests.

#ifndef NSL_BENCHMARKS_HPP_
#define NSL_BENCHMARKS_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nsl/forward_ops.hpp"
#include "nsl/noise_core.hpp"
#include "nsl/oracles.hpp"

namespace nsl::bench {

// d = 2: Phi(z) = M z + b, A = full inpainting mask, sigma = 0.2.
struct AffineBenchmark {
  Matrix m;
  Vector b;
  Matrix a;
  Vector y;
  double sigma = 0.2;
  GenerativeMap map;
  LikelihoodModel lik;

  GaussianPosterior posterior() const;
};

AffineBenchmark affine_benchmark();

// Number of independent chains pooled by the equilibrium checks.
inline constexpr int kEquilibriumChains = 8;

struct GaussianMixture {
  std::vector<double> weights;  // normalized
  std::vector<double> means;
  std::vector<double> stds;

  double pdf(double x) const;
};

// p(y | x) = N(y; gain * x, noise^2).
struct ScalarGaussianLikelihood {
  double y = 0.0;
  double gain = 1.0;
  double noise = 1.0;

  double operator()(double x) const;
};

struct TheoremInstance {
  GaussianMixture p_data;
  GaussianMixture model_prior;
  ScalarGaussianLikelihood likelihood;
};

// Random 1-D instances: 1-3 component mixtures and a perturbed model prior.
std::vector<TheoremInstance> theorem_instances(int count, std::uint64_t seed);

// [-30, 30] with 4001 nodes.
GridSpec theorem_grid();

struct DpiTriple {
  std::string name;
  GaussianMixture p;
  GaussianMixture q;
  std::function<double(double)> phi;
};

// Twenty (p, q, phi) triples, including N(1,1) vs N(-1,1) under |x|.
std::vector<DpiTriple> dpi_triples();

struct NamedMap {
  std::string name;
  GenerativeMap map;
};
struct NamedOperator {
  std::string name;
  ForwardOperator op;
  double sigma;
};

// Maps and operators on 4 x 4 images (d = 16) for gradient checks.
std::vector<NamedMap> gradient_maps();
std::vector<NamedOperator> gradient_operators();

// 1-D nonlinear instance for the drift-score identity.
struct ScalarInstance {
  GenerativeMap map;
  LikelihoodModel lik;
};
ScalarInstance drift_score_instance();

}  // namespace nsl::bench

#endif  // NSL_BENCHMARKS_HPP_
