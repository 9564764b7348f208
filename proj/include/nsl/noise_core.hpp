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

#ifndef NSL_NOISE_CORE_HPP_
#define NSL_NOISE_CORE_HPP_

#include <cstdint>
#include <memory>
#include <string_view>
#include <variant>
#include <vector>

#include "nsl/types.hpp"

namespace nsl {

enum class MapKind { affine, mlp, two_step };

std::string_view to_string(MapKind kind);

// One tanh layer: a_out = tanh(weights * a_in + bias).
struct DenseLayer {
  Matrix weights;
  Vector bias;
};

// Deterministic, differentiable noise-to-data map x0 = Phi(x1) on R^d. The
// noise prior is fixed to N(0, I).
//
// Instances are immutable after construction, so apply() and pullback() are
// safe to call concurrently.
class GenerativeMap {
 public:
  struct Affine {
    Matrix matrix;
    Vector offset;
  };
  struct Mlp {
    std::vector<DenseLayer> layers;
  };
  // inner(mix * inner(x1) + sqrt(1 - mix^2) * noise), noise drawn once.
  struct TwoStep {
    std::shared_ptr<const GenerativeMap> inner;
    Vector noise;
    double mix = 0.5;
    std::uint64_t seed = 0;
  };

  static GenerativeMap affine(Matrix matrix, Vector offset);
  static GenerativeMap identity(Index dim);
  static GenerativeMap mlp(std::vector<DenseLayer> layers);
  // Layers d -> hidden[0] -> ... -> d with N(0, gain^2 / fan_in) weights and
  // N(0, 0.01) biases drawn from `seed`.
  static GenerativeMap random_mlp(Index dim, const std::vector<Index>& hidden,
                                  std::uint64_t seed, double gain = 1.0);

  MapKind kind() const;
  Index dim() const { return dim_; }
  // Evaluations of the underlying network per call (eta).
  int nfe_per_eval() const;

  DataVector apply(const NoiseVector& x1) const;
  // J(x1)^T v, exact.
  NoiseVector pullback(const NoiseVector& x1, const Cotangent& v) const;

  const Affine* as_affine() const { return std::get_if<Affine>(&params_); }
  const Mlp* as_mlp() const { return std::get_if<Mlp>(&params_); }
  const TwoStep* as_two_step() const { return std::get_if<TwoStep>(&params_); }

 private:
  friend GenerativeMap make_two_step_map(const GenerativeMap& inner,
                                         std::uint64_t seed, double mix);

  GenerativeMap(Index dim, std::variant<Affine, Mlp, TwoStep> params)
      : dim_(dim), params_(std::move(params)) {}

  void check_input(const NoiseVector& x1) const;

  Index dim_ = 0;
  std::variant<Affine, Mlp, TwoStep> params_;
};

// Two-step composition with its intermediate noise drawn once from N(0, I)
// using `seed` and stored. `inner` must be affine or mlp; mix in (0, 1).
GenerativeMap make_two_step_map(const GenerativeMap& inner, std::uint64_t seed,
                                double mix);

// Relative error ||pullback - fd|| / max(||fd||, 1e-300) where fd is the
// central-difference estimate of J^T v, column by column with step h.
double check_pullback_fd(const GenerativeMap& map, const NoiseVector& x1,
                         const Cotangent& v, double h = 1e-5);

}  // namespace nsl

#endif  // NSL_NOISE_CORE_HPP_
