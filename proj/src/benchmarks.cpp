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

#include "nsl/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nsl/rng.hpp"

namespace nsl::bench {

namespace {

double normal_pdf(double x, double mean, double sd) {
  const double r = (x - mean) / sd;
  return std::exp(-0.5 * r * r) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

GaussianMixture single(double mean, double sd) { return {{1.0}, {mean}, {sd}}; }

}  // namespace

GaussianPosterior AffineBenchmark::posterior() const {
  return gaussian_posterior_closed_form(m, b, a, y, sigma);
}

AffineBenchmark affine_benchmark() {
  Matrix m(2, 2);
  m << 1.0, 0.4, -0.3, 0.8;
  Vector b(2);
  b << 0.1, -0.2;
  Vector y(2);
  y << 0.6, -0.35;
  const double sigma = 0.2;
  auto op = ForwardOperator::inpaint({1, 1});
  Matrix a = op.matrix();
  return AffineBenchmark{m, b, a, y, sigma, GenerativeMap::affine(m, b),
                         LikelihoodModel(std::move(op), Measurement{y, sigma})};
}

double GaussianMixture::pdf(double x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * normal_pdf(x, means[i], stds[i]);
  return s;
}

double ScalarGaussianLikelihood::operator()(double x) const {
  return normal_pdf(y, gain * x, noise);
}

std::vector<TheoremInstance> theorem_instances(int count, std::uint64_t seed) {
  std::vector<TheoremInstance> out;
  for (int i = 0; i < count; ++i) {
    const NormalStream uni(seed, static_cast<std::uint32_t>(i), StreamPurpose::generic);
    const Vector u = uni.uniform(0, 32);
    const Vector g = uni.normal(1, 16);
    int ui = 0;
    int gi = 0;
    TheoremInstance inst;
    const int comps = 1 + std::min(2, static_cast<int>(3.0 * u[ui++]));
    double wsum = 0.0;
    for (int c = 0; c < comps; ++c) {
      inst.p_data.weights.push_back(0.2 + 0.8 * u[ui++]);
      inst.p_data.means.push_back(-3.0 + 6.0 * u[ui++]);
      inst.p_data.stds.push_back(0.3 + 1.2 * u[ui++]);
      wsum += inst.p_data.weights.back();
    }
    for (auto& w : inst.p_data.weights) w /= wsum;
    inst.model_prior = inst.p_data;
    wsum = 0.0;
    for (int c = 0; c < comps; ++c) {
      inst.model_prior.means[static_cast<std::size_t>(c)] += 0.3 * g[gi++];
      inst.model_prior.stds[static_cast<std::size_t>(c)] *= std::exp(0.15 * g[gi++]);
      inst.model_prior.weights[static_cast<std::size_t>(c)] *= std::exp(0.2 * g[gi++]);
      wsum += inst.model_prior.weights[static_cast<std::size_t>(c)];
    }
    for (auto& w : inst.model_prior.weights) w /= wsum;
    inst.likelihood.y = -4.0 + 8.0 * u[ui++];
    inst.likelihood.gain = 0.5 + 1.5 * u[ui++];
    inst.likelihood.noise = 0.2 + 1.8 * u[ui++];
    out.push_back(std::move(inst));
  }
  return out;
}

GridSpec theorem_grid() { return {GridAxis{-30.0, 30.0, 4001}}; }

std::vector<DpiTriple> dpi_triples() {
  std::vector<DpiTriple> t;
  auto id = [](double x) { return x; };
  auto absf = [](double x) { return std::abs(x); };
  t.push_back({"abs_symmetric_pair", single(1.0, 1.0), single(-1.0, 1.0), absf});
  t.push_back({"identity_shift", single(0.0, 1.0), single(1.0, 1.0), id});
  t.push_back({"identity_equal", single(0.3, 0.8), single(0.3, 0.8), id});
  t.push_back({"square", single(0.5, 1.0), single(-0.2, 1.3), [](double x) { return x * x; }});
  t.push_back({"tanh", single(0.0, 1.0), single(0.8, 0.7), [](double x) { return std::tanh(x); }});
  t.push_back({"cube", single(-0.5, 1.0), single(0.5, 1.0), [](double x) { return x * x * x; }});
  t.push_back({"sin", single(0.0, 2.0), single(1.0, 1.5), [](double x) { return std::sin(x); }});
  t.push_back({"hdr_clip", single(0.0, 0.5), single(0.2, 0.4),
               [](double x) { return std::clamp(2.0 * x, -1.0, 1.0); }});
  t.push_back({"exp", single(0.0, 1.0), single(0.5, 1.2), [](double x) { return std::exp(x / 3.0); }});
  t.push_back({"affine", single(1.0, 0.5), single(0.0, 0.5), [](double x) { return 2.0 * x + 1.0; }});
  t.push_back({"floor", single(0.0, 1.0), single(0.4, 1.0), [](double x) { return std::floor(x); }});
  t.push_back({"sign", single(0.5, 1.0), single(-0.5, 1.0), [](double x) { return x >= 0.0 ? 1.0 : -1.0; }});
  t.push_back({"mixture_abs", {{0.5, 0.5}, {-2.0, 2.0}, {0.5, 0.5}}, single(2.0, 0.5), absf});
  t.push_back({"mixture_identity", {{0.5, 0.5}, {-2.0, 2.0}, {0.5, 0.5}}, single(0.0, 1.5), id});
  t.push_back({"mixture_square", {{0.3, 0.7}, {-1.0, 1.5}, {0.6, 0.4}},
               {{0.6, 0.4}, {-1.2, 1.0}, {0.5, 0.7}}, [](double x) { return x * x; }});
  t.push_back({"logistic", single(0.0, 2.0), single(-1.0, 1.0),
               [](double x) { return 1.0 / (1.0 + std::exp(-x)); }});
  t.push_back({"fold_mod", single(0.0, 3.0), single(2.0, 2.0), [](double x) { return std::fmod(std::abs(x), 2.0); }});
  t.push_back({"scale_shrink", single(0.0, 1.0), single(0.0, 2.0), [](double x) { return 0.01 * x; }});
  t.push_back({"relu", single(0.2, 1.0), single(-0.3, 0.8), [](double x) { return std::max(0.0, x); }});
  t.push_back({"wide_identity", single(-4.0, 1.0), single(4.0, 1.0), id});
  return t;
}

std::vector<NamedMap> gradient_maps() {
  constexpr Index d = 16;
  const NormalStream s(2024, 0, StreamPurpose::weights);
  const Matrix m = Matrix::Identity(d, d) * 0.5 +
                   Eigen::Map<const Matrix>(s.normal(0, d * d).data(), d, d) * 0.15;
  const Vector b = s.normal(1, d) * 0.1;
  std::vector<NamedMap> out;
  out.push_back({"affine", GenerativeMap::affine(m, b)});
  out.push_back({"mlp", GenerativeMap::random_mlp(d, {24}, 31)});
  out.push_back({"two_step", make_two_step_map(GenerativeMap::random_mlp(d, {24}, 37), 9, 0.6)});
  return out;
}

std::vector<NamedOperator> gradient_operators() {
  constexpr Index d = 16;
  std::vector<NamedOperator> out;
  out.push_back({"inpaint", ForwardOperator::random_inpaint(d, 0.7, 5), 0.1});
  out.push_back({"avgpool", ForwardOperator::avgpool(d, 2), 0.1});
  out.push_back({"conv_blur", ForwardOperator::conv_blur(d, ForwardOperator::gaussian_kernel(3, 1.0)), 0.1});
  out.push_back({"hdr_clip", ForwardOperator::hdr_clip(d), 0.1});
  out.push_back({"dft_magnitude", ForwardOperator::dft_magnitude({4, 4}), 0.05});
  out.push_back({"toy_nonlinear", ForwardOperator::toy_nonlinear(d, 12, 3), 0.1});
  return out;
}

ScalarInstance drift_score_instance() {
  auto map = GenerativeMap::random_mlp(1, {6}, 11, 1.5);
  auto op = ForwardOperator::toy_nonlinear(1, 4, 5);
  const Vector truth = map.apply(Vector::Constant(1, 0.7));
  Measurement meas{(op.apply(truth).array() + 0.05).matrix(), 0.2};
  return ScalarInstance{std::move(map), LikelihoodModel(std::move(op), std::move(meas))};
}

}  // namespace nsl::bench
