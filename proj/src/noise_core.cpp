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
#include <string>

#include "nsl/rng.hpp"

namespace nsl {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Returns every layer's activation; activations[0] is the input.
std::vector<Vector> mlp_forward(const GenerativeMap::Mlp& mlp,
                                const Vector& x) {
  std::vector<Vector> activations;
  activations.reserve(mlp.layers.size() + 1);
  activations.push_back(x);
  for (const auto& layer : mlp.layers) {
    Vector s = layer.weights * activations.back() + layer.bias;
    activations.push_back(s.array().tanh().matrix());
  }
  return activations;
}

}  // namespace

std::string_view to_string(MapKind kind) {
  switch (kind) {
    case MapKind::affine:
      return "affine";
    case MapKind::mlp:
      return "mlp";
    case MapKind::two_step:
      return "two_step";
  }
  return "unknown";
}

GenerativeMap GenerativeMap::affine(Matrix matrix, Vector offset) {
  require(matrix.rows() >= 1 && matrix.rows() == matrix.cols(),
          "affine map: matrix must be square and non-empty");
  require(offset.size() == matrix.rows(),
          "affine map: offset length must equal matrix size");
  require(matrix.allFinite() && offset.allFinite(),
          "affine map: parameters must be finite");
  const Index d = matrix.rows();
  return GenerativeMap(d, Affine{std::move(matrix), std::move(offset)});
}

GenerativeMap GenerativeMap::identity(Index dim) {
  require(dim >= 1, "identity map: dim must be >= 1");
  return affine(Matrix::Identity(dim, dim), Vector::Zero(dim));
}

GenerativeMap GenerativeMap::mlp(std::vector<DenseLayer> layers) {
  require(!layers.empty(), "mlp map: at least one layer required");
  const Index d = layers.front().weights.cols();
  require(d >= 1, "mlp map: input width must be >= 1");
  Index width = d;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    require(layer.weights.cols() == width,
            "mlp map: layer " + std::to_string(l) + " expects input width " +
                std::to_string(width));
    require(layer.bias.size() == layer.weights.rows(),
            "mlp map: layer " + std::to_string(l) + " bias length mismatch");
    require(layer.weights.allFinite() && layer.bias.allFinite(),
            "mlp map: parameters must be finite");
    width = layer.weights.rows();
  }
  require(width == d, "mlp map: output width must equal input width");
  return GenerativeMap(d, Mlp{std::move(layers)});
}

GenerativeMap GenerativeMap::random_mlp(Index dim,
                                        const std::vector<Index>& hidden,
                                        std::uint64_t seed, double gain) {
  require(dim >= 1, "random_mlp: dim must be >= 1");
  const NormalStream stream(seed, 0, StreamPurpose::weights);
  std::vector<Index> widths{dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(dim);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const Index fan_in = widths[l];
    const Index fan_out = widths[l + 1];
    require(fan_out >= 1, "random_mlp: hidden widths must be >= 1");
    const Vector w = stream.normal(2 * l, fan_in * fan_out);
    DenseLayer layer;
    layer.weights = Eigen::Map<const Matrix>(w.data(), fan_out, fan_in) *
                    (gain / std::sqrt(static_cast<double>(fan_in)));
    layer.bias = stream.normal(2 * l + 1, fan_out) * 0.1;
    layers.push_back(std::move(layer));
  }
  return mlp(std::move(layers));
}

GenerativeMap make_two_step_map(const GenerativeMap& inner, std::uint64_t seed,
                                double mix) {
  require(inner.kind() == MapKind::affine || inner.kind() == MapKind::mlp,
          "two_step map: inner map must be affine or mlp");
  require(mix > 0.0 && mix < 1.0, "two_step map: mix must lie in (0, 1)");
  GenerativeMap::TwoStep params;
  params.inner = std::make_shared<const GenerativeMap>(inner);
  params.noise = NormalStream(seed, 0, StreamPurpose::map_noise)
                     .normal(0, inner.dim());
  params.mix = mix;
  params.seed = seed;
  return GenerativeMap(inner.dim(), std::move(params));
}

MapKind GenerativeMap::kind() const {
  return std::visit(Overloaded{[](const Affine&) { return MapKind::affine; },
                               [](const Mlp&) { return MapKind::mlp; },
                               [](const TwoStep&) { return MapKind::two_step; }},
                    params_);
}

int GenerativeMap::nfe_per_eval() const {
  return kind() == MapKind::two_step ? 2 : 1;
}

void GenerativeMap::check_input(const NoiseVector& x1) const {
  require(x1.size() == dim_, "generative map: input has length " +
                                 std::to_string(x1.size()) + ", expected " +
                                 std::to_string(dim_));
}

DataVector GenerativeMap::apply(const NoiseVector& x1) const {
  check_input(x1);
  return std::visit(
      Overloaded{
          [&](const Affine& p) -> Vector { return p.matrix * x1 + p.offset; },
          [&](const Mlp& p) -> Vector { return mlp_forward(p, x1).back(); },
          [&](const TwoStep& p) -> Vector {
            const Vector mid = p.mix * p.inner->apply(x1) +
                               std::sqrt(1.0 - p.mix * p.mix) * p.noise;
            return p.inner->apply(mid);
          }},
      params_);
}

NoiseVector GenerativeMap::pullback(const NoiseVector& x1,
                                    const Cotangent& v) const {
  check_input(x1);
  require(v.size() == dim_, "generative map: cotangent has length " +
                                std::to_string(v.size()) + ", expected " +
                                std::to_string(dim_));
  return std::visit(
      Overloaded{
          [&](const Affine& p) -> Vector { return p.matrix.transpose() * v; },
          [&](const Mlp& p) -> Vector {
            const auto acts = mlp_forward(p, x1);
            Vector delta = v;
            for (std::size_t l = p.layers.size(); l-- > 0;) {
              const Vector& a = acts[l + 1];
              delta = delta.cwiseProduct((1.0 - a.array().square()).matrix());
              delta = p.layers[l].weights.transpose() * delta;
            }
            return delta;
          },
          [&](const TwoStep& p) -> Vector {
            const Vector mid = p.mix * p.inner->apply(x1) +
                               std::sqrt(1.0 - p.mix * p.mix) * p.noise;
            return p.mix * p.inner->pullback(x1, p.inner->pullback(mid, v));
          }},
      params_);
}

double check_pullback_fd(const GenerativeMap& map, const NoiseVector& x1,
                         const Cotangent& v, double h) {
  require(h > 0.0, "check_pullback_fd: step h must be positive");
  const Vector analytic = map.pullback(x1, v);
  Vector fd(map.dim());
  Vector probe = x1;
  for (Index i = 0; i < map.dim(); ++i) {
    probe[i] = x1[i] + h;
    const double up = v.dot(map.apply(probe));
    probe[i] = x1[i] - h;
    const double down = v.dot(map.apply(probe));
    probe[i] = x1[i];
    fd[i] = (up - down) / (2.0 * h);
  }
  return (analytic - fd).norm() / std::max(fd.norm(), 1e-300);
}

}  // namespace nsl
