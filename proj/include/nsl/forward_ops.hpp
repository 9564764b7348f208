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

#ifndef NSL_FORWARD_OPS_HPP_
#define NSL_FORWARD_OPS_HPP_

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include "nsl/noise_core.hpp"
#include "nsl/types.hpp"

namespace nsl {

enum class OperatorKind {
  inpaint,
  avgpool,
  conv_blur,
  hdr_clip,
  dft_magnitude,
  toy_nonlinear
};

std::string_view to_string(OperatorKind kind);

// Measurement operator A: R^in_dim -> R^out_dim with its (sub)gradient
// pullback. Image operators interpret the input as a square, row-major image.
class ForwardOperator {
 public:
  // y = mask .* x; out_dim == in_dim.
  struct Inpaint {
    std::vector<std::uint8_t> mask;
  };
  // Non-overlapping factor x factor means of a side x side image.
  struct AvgPool {
    Index side = 0;
    Index factor = 1;
  };
  // Circular 2-D convolution with a k x k kernel centred at (k/2, k/2).
  struct ConvBlur {
    Index side = 0;
    Index kernel_size = 1;
    Vector kernel;  // row-major
  };
  // clip(scale * x, -1, 1).
  struct HdrClip {
    double scale = 2.0;
  };
  // |F P x|: input zero-padded by `pad` entries per axis, then 1-D or 2-D DFT
  // modulus.
  struct DftMagnitude {
    std::vector<Index> shape;
    Index pad = 0;
  };
  // W2 tanh(W1 x + b1), weights fixed from a seed.
  struct ToyNonlinear {
    Index hidden = 0;
    std::uint64_t seed = 0;
    Matrix w1;
    Vector b1;
    Matrix w2;
  };
  using Params =
      std::variant<Inpaint, AvgPool, ConvBlur, HdrClip, DftMagnitude, ToyNonlinear>;

  static ForwardOperator inpaint(std::vector<std::uint8_t> mask);
  // Keeps each pixel independently with probability keep_fraction.
  static ForwardOperator random_inpaint(Index dim, double keep_fraction,
                                        std::uint64_t seed);
  static ForwardOperator identity(Index dim);
  static ForwardOperator avgpool(Index in_dim, Index factor);
  static ForwardOperator conv_blur(Index in_dim, Vector kernel);
  static ForwardOperator hdr_clip(Index dim, double scale = 2.0);
  static ForwardOperator dft_magnitude(std::vector<Index> shape, Index pad = 0);
  static ForwardOperator toy_nonlinear(Index dim, Index hidden,
                                       std::uint64_t seed);

  // Normalized size x size Gaussian kernel (size odd).
  static Vector gaussian_kernel(Index size, double stddev);

  OperatorKind kind() const;
  Index in_dim() const { return in_dim_; }
  Index out_dim() const { return out_dim_; }
  bool is_linear() const;
  const Params& params() const { return params_; }

  Vector apply(const DataVector& x0) const;
  // (dA/dx0)^T v; hdr_clip uses slope 0 on saturated entries, dft_magnitude
  // uses 0 for bins whose coefficient is exactly zero.
  DataVector pullback(const DataVector& x0, const Cotangent& v) const;

  // Dense matrix of a linear operator, built column by column.
  Matrix matrix() const;

 private:
  ForwardOperator(Index in_dim, Index out_dim, Params params)
      : in_dim_(in_dim), out_dim_(out_dim), params_(std::move(params)) {}

  Index in_dim_ = 0;
  Index out_dim_ = 0;
  Params params_;
};

// Observation y with Gaussian noise level sigma.
struct Measurement {
  Vector values;
  double sigma = 0.1;
};

// Adds N(0, sigma^2 I) noise to A(x0_true) from a dedicated stream.
Measurement synthesize_measurement(const ForwardOperator& op,
                                   const DataVector& x0_true, double sigma,
                                   std::uint64_t noise_seed);

// Gaussian negative log-likelihood L_y(x0) = ||y - A(x0)||^2 / (2 sigma^2),
// additive constant dropped.
class LikelihoodModel {
 public:
  LikelihoodModel(ForwardOperator op, Measurement measurement);

  const ForwardOperator& op() const { return op_; }
  const Measurement& measurement() const { return measurement_; }
  double sigma() const { return measurement_.sigma; }

  double neg_log_likelihood(const DataVector& x0) const;
  // Gradient of L_y with respect to x0.
  DataVector data_gradient(const DataVector& x0) const;

 private:
  ForwardOperator op_;
  Measurement measurement_;
};

double neg_log_likelihood(const LikelihoodModel& lik, const DataVector& x0);

// Loss, data point, and noise-space gradient from one forward/backward pass.
struct NoiseLossEval {
  double loss = 0.0;
  DataVector x0;
  NoiseVector grad;
};

NoiseLossEval evaluate_noise_loss(const LikelihoodModel& lik,
                                  const GenerativeMap& map,
                                  const NoiseVector& x1);

// grad_{x1} L_y(Phi(x1)) by chaining the operator and map pullbacks.
NoiseVector grad_noise_loss(const LikelihoodModel& lik, const GenerativeMap& map,
                            const NoiseVector& x1);

}  // namespace nsl

#endif  // NSL_FORWARD_OPS_HPP_
