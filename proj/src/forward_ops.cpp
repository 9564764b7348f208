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

#include "nsl/forward_ops.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "nsl/rng.hpp"

namespace nsl {

namespace {

using Complex = std::complex<double>;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Index square_side(Index n, const char* who) {
  const auto side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
  require(n >= 1 && side * side == n,
          std::string(who) + ": input of length " + std::to_string(n) +
              " is not a square image");
  return side;
}

// In-place unnormalized DFT along every axis of a row-major array;
// sign = -1 forward, +1 inverse.
void dft_inplace(std::vector<Complex>& data, const std::vector<Index>& shape,
                 int sign) {
  const Index total = static_cast<Index>(data.size());
  Index stride = total;
  for (const Index len : shape) {
    stride /= len;
    std::vector<Complex> twiddle(static_cast<std::size_t>(len));
    for (Index k = 0; k < len; ++k) {
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                           static_cast<double>(len);
      twiddle[static_cast<std::size_t>(k)] = Complex(std::cos(angle), std::sin(angle));
    }
    std::vector<Complex> line(static_cast<std::size_t>(len));
    for (Index outer = 0; outer < total / (len * stride); ++outer) {
      for (Index inner = 0; inner < stride; ++inner) {
        const Index base = outer * len * stride + inner;
        for (Index k = 0; k < len; ++k) {
          Complex acc = 0.0;
          for (Index j = 0; j < len; ++j) {
            acc += data[static_cast<std::size_t>(base + j * stride)] *
                   twiddle[static_cast<std::size_t>((j * k) % len)];
          }
          line[static_cast<std::size_t>(k)] = acc;
        }
        for (Index k = 0; k < len; ++k) {
          data[static_cast<std::size_t>(base + k * stride)] =
              line[static_cast<std::size_t>(k)];
        }
      }
    }
  }
}

std::vector<Index> padded_shape(const ForwardOperator::DftMagnitude& p) {
  std::vector<Index> out = p.shape;
  for (auto& len : out) len += p.pad;
  return out;
}

// Zero-pads x (shape p.shape) into the padded layout, top-left aligned.
std::vector<Complex> pad_input(const ForwardOperator::DftMagnitude& p,
                               const Vector& x) {
  const auto full = padded_shape(p);
  Index total = 1;
  for (const Index len : full) total *= len;
  std::vector<Complex> buf(static_cast<std::size_t>(total), 0.0);
  if (p.shape.size() == 1) {
    for (Index i = 0; i < p.shape[0]; ++i) buf[static_cast<std::size_t>(i)] = x[i];
  } else {
    for (Index r = 0; r < p.shape[0]; ++r) {
      for (Index c = 0; c < p.shape[1]; ++c) {
        buf[static_cast<std::size_t>(r * full[1] + c)] = x[r * p.shape[1] + c];
      }
    }
  }
  return buf;
}

Vector crop_real(const ForwardOperator::DftMagnitude& p,
                 const std::vector<Complex>& buf) {
  const auto full = padded_shape(p);
  Index n = 1;
  for (const Index len : p.shape) n *= len;
  Vector out(n);
  if (p.shape.size() == 1) {
    for (Index i = 0; i < n; ++i) out[i] = buf[static_cast<std::size_t>(i)].real();
  } else {
    for (Index r = 0; r < p.shape[0]; ++r) {
      for (Index c = 0; c < p.shape[1]; ++c) {
        out[r * p.shape[1] + c] = buf[static_cast<std::size_t>(r * full[1] + c)].real();
      }
    }
  }
  return out;
}

Index wrap(Index i, Index n) { return ((i % n) + n) % n; }

}  // namespace

std::string_view to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::inpaint:
      return "inpaint";
    case OperatorKind::avgpool:
      return "avgpool";
    case OperatorKind::conv_blur:
      return "conv_blur";
    case OperatorKind::hdr_clip:
      return "hdr_clip";
    case OperatorKind::dft_magnitude:
      return "dft_magnitude";
    case OperatorKind::toy_nonlinear:
      return "toy_nonlinear";
  }
  return "unknown";
}

ForwardOperator ForwardOperator::inpaint(std::vector<std::uint8_t> mask) {
  require(!mask.empty(), "inpaint: mask must be non-empty");
  for (const auto m : mask) require(m == 0 || m == 1, "inpaint: mask entries must be 0 or 1");
  const auto d = static_cast<Index>(mask.size());
  return ForwardOperator(d, d, Inpaint{std::move(mask)});
}

ForwardOperator ForwardOperator::random_inpaint(Index dim, double keep_fraction,
                                                std::uint64_t seed) {
  require(dim >= 1, "random_inpaint: dim must be >= 1");
  require(keep_fraction >= 0.0 && keep_fraction <= 1.0,
          "random_inpaint: keep_fraction must lie in [0, 1]");
  const Vector u = NormalStream(seed, 0, StreamPurpose::weights).uniform(0, dim);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(dim));
  for (Index i = 0; i < dim; ++i) mask[static_cast<std::size_t>(i)] = u[i] < keep_fraction ? 1 : 0;
  return inpaint(std::move(mask));
}

ForwardOperator ForwardOperator::identity(Index dim) {
  require(dim >= 1, "identity operator: dim must be >= 1");
  return inpaint(std::vector<std::uint8_t>(static_cast<std::size_t>(dim), 1));
}

ForwardOperator ForwardOperator::avgpool(Index in_dim, Index factor) {
  const Index side = square_side(in_dim, "avgpool");
  require(factor >= 1 && side % factor == 0,
          "avgpool: factor must divide the image side " + std::to_string(side));
  const Index out_side = side / factor;
  return ForwardOperator(in_dim, out_side * out_side, AvgPool{side, factor});
}

ForwardOperator ForwardOperator::conv_blur(Index in_dim, Vector kernel) {
  const Index side = square_side(in_dim, "conv_blur");
  const Index ksize = square_side(kernel.size(), "conv_blur kernel");
  require(ksize % 2 == 1, "conv_blur: kernel size must be odd");
  require(kernel.allFinite(), "conv_blur: kernel must be finite");
  return ForwardOperator(in_dim, in_dim, ConvBlur{side, ksize, std::move(kernel)});
}

ForwardOperator ForwardOperator::hdr_clip(Index dim, double scale) {
  require(dim >= 1, "hdr_clip: dim must be >= 1");
  require(scale > 0.0 && std::isfinite(scale), "hdr_clip: scale must be positive");
  return ForwardOperator(dim, dim, HdrClip{scale});
}

ForwardOperator ForwardOperator::dft_magnitude(std::vector<Index> shape, Index pad) {
  require(shape.size() == 1 || shape.size() == 2,
          "dft_magnitude: shape must be 1-D or 2-D");
  require(pad >= 0, "dft_magnitude: pad must be >= 0");
  Index in = 1;
  Index out = 1;
  for (const Index len : shape) {
    require(len >= 1, "dft_magnitude: axis lengths must be >= 1");
    in *= len;
    out *= len + pad;
  }
  if (shape.size() == 2) {
    require(shape[0] == shape[1], "dft_magnitude: 2-D input must be square");
  }
  return ForwardOperator(in, out, DftMagnitude{std::move(shape), pad});
}

ForwardOperator ForwardOperator::toy_nonlinear(Index dim, Index hidden,
                                               std::uint64_t seed) {
  require(dim >= 1 && hidden >= 1, "toy_nonlinear: dims must be >= 1");
  const NormalStream stream(seed, 1, StreamPurpose::weights);
  ToyNonlinear p;
  p.hidden = hidden;
  p.seed = seed;
  const Vector w1 = stream.normal(0, hidden * dim);
  const Vector w2 = stream.normal(2, dim * hidden);
  p.w1 = Eigen::Map<const Matrix>(w1.data(), hidden, dim) /
         std::sqrt(static_cast<double>(dim));
  p.b1 = stream.normal(1, hidden) * 0.1;
  p.w2 = Eigen::Map<const Matrix>(w2.data(), dim, hidden) /
         std::sqrt(static_cast<double>(hidden));
  return ForwardOperator(dim, dim, std::move(p));
}

Vector ForwardOperator::gaussian_kernel(Index size, double stddev) {
  require(size >= 1 && size % 2 == 1, "gaussian_kernel: size must be odd");
  require(stddev > 0.0, "gaussian_kernel: stddev must be positive");
  Vector k(size * size);
  const Index c = size / 2;
  for (Index a = 0; a < size; ++a) {
    for (Index b = 0; b < size; ++b) {
      const double r2 = static_cast<double>((a - c) * (a - c) + (b - c) * (b - c));
      k[a * size + b] = std::exp(-r2 / (2.0 * stddev * stddev));
    }
  }
  return k / k.sum();
}

OperatorKind ForwardOperator::kind() const {
  return std::visit(
      Overloaded{[](const Inpaint&) { return OperatorKind::inpaint; },
                 [](const AvgPool&) { return OperatorKind::avgpool; },
                 [](const ConvBlur&) { return OperatorKind::conv_blur; },
                 [](const HdrClip&) { return OperatorKind::hdr_clip; },
                 [](const DftMagnitude&) { return OperatorKind::dft_magnitude; },
                 [](const ToyNonlinear&) { return OperatorKind::toy_nonlinear; }},
      params_);
}

bool ForwardOperator::is_linear() const {
  const auto k = kind();
  return k == OperatorKind::inpaint || k == OperatorKind::avgpool ||
         k == OperatorKind::conv_blur;
}

Vector ForwardOperator::apply(const DataVector& x) const {
  require(x.size() == in_dim_, std::string(to_string(kind())) +
                                   ": input has length " + std::to_string(x.size()) +
                                   ", expected " + std::to_string(in_dim_));
  return std::visit(
      Overloaded{
          [&](const Inpaint& p) -> Vector {
            Vector y(in_dim_);
            for (Index i = 0; i < in_dim_; ++i) y[i] = p.mask[static_cast<std::size_t>(i)] ? x[i] : 0.0;
            return y;
          },
          [&](const AvgPool& p) -> Vector {
            const Index os = p.side / p.factor;
            Vector y = Vector::Zero(os * os);
            const double w = 1.0 / static_cast<double>(p.factor * p.factor);
            for (Index r = 0; r < p.side; ++r) {
              for (Index c = 0; c < p.side; ++c) {
                y[(r / p.factor) * os + c / p.factor] += w * x[r * p.side + c];
              }
            }
            return y;
          },
          [&](const ConvBlur& p) -> Vector {
            const Index s = p.side;
            const Index k = p.kernel_size;
            const Index c = k / 2;
            Vector y = Vector::Zero(s * s);
            for (Index i = 0; i < s; ++i) {
              for (Index j = 0; j < s; ++j) {
                double acc = 0.0;
                for (Index a = 0; a < k; ++a) {
                  for (Index b = 0; b < k; ++b) {
                    acc += p.kernel[a * k + b] *
                           x[wrap(i - a + c, s) * s + wrap(j - b + c, s)];
                  }
                }
                y[i * s + j] = acc;
              }
            }
            return y;
          },
          [&](const HdrClip& p) -> Vector {
            return (p.scale * x).cwiseMax(-1.0).cwiseMin(1.0);
          },
          [&](const DftMagnitude& p) -> Vector {
            auto buf = pad_input(p, x);
            dft_inplace(buf, padded_shape(p), -1);
            Vector y(out_dim_);
            for (Index i = 0; i < out_dim_; ++i) y[i] = std::abs(buf[static_cast<std::size_t>(i)]);
            return y;
          },
          [&](const ToyNonlinear& p) -> Vector {
            return p.w2 * (p.w1 * x + p.b1).array().tanh().matrix();
          }},
      params_);
}

DataVector ForwardOperator::pullback(const DataVector& x, const Cotangent& v) const {
  require(x.size() == in_dim_, std::string(to_string(kind())) +
                                   ": input has length " + std::to_string(x.size()) +
                                   ", expected " + std::to_string(in_dim_));
  require(v.size() == out_dim_, std::string(to_string(kind())) +
                                    ": cotangent has length " + std::to_string(v.size()) +
                                    ", expected " + std::to_string(out_dim_));
  return std::visit(
      Overloaded{
          [&](const Inpaint& p) -> Vector {
            Vector u(in_dim_);
            for (Index i = 0; i < in_dim_; ++i) u[i] = p.mask[static_cast<std::size_t>(i)] ? v[i] : 0.0;
            return u;
          },
          [&](const AvgPool& p) -> Vector {
            const Index os = p.side / p.factor;
            const double w = 1.0 / static_cast<double>(p.factor * p.factor);
            Vector u(in_dim_);
            for (Index r = 0; r < p.side; ++r) {
              for (Index c = 0; c < p.side; ++c) {
                u[r * p.side + c] = w * v[(r / p.factor) * os + c / p.factor];
              }
            }
            return u;
          },
          [&](const ConvBlur& p) -> Vector {
            const Index s = p.side;
            const Index k = p.kernel_size;
            const Index c = k / 2;
            Vector u = Vector::Zero(s * s);
            for (Index i = 0; i < s; ++i) {
              for (Index j = 0; j < s; ++j) {
                double acc = 0.0;
                for (Index a = 0; a < k; ++a) {
                  for (Index b = 0; b < k; ++b) {
                    acc += p.kernel[a * k + b] *
                           v[wrap(i + a - c, s) * s + wrap(j + b - c, s)];
                  }
                }
                u[i * s + j] = acc;
              }
            }
            return u;
          },
          [&](const HdrClip& p) -> Vector {
            Vector u(in_dim_);
            for (Index i = 0; i < in_dim_; ++i) {
              u[i] = std::abs(p.scale * x[i]) < 1.0 ? p.scale * v[i] : 0.0;
            }
            return u;
          },
          [&](const DftMagnitude& p) -> Vector {
            auto buf = pad_input(p, x);
            const auto full = padded_shape(p);
            dft_inplace(buf, full, -1);
            // d|c_k|/dx = Re(conj(c_k) F_k.) / |c_k|, so J^T v = Re(F^H w) with
            // w_k = v_k c_k / |c_k|.
            // Bins at roundoff level are treated as exact zeros (subgradient 0).
            const double tiny = 1e-12 * std::max(1.0, x.cwiseAbs().sum());
            for (Index k = 0; k < out_dim_; ++k) {
              auto& ck = buf[static_cast<std::size_t>(k)];
              const double mag = std::abs(ck);
              ck = mag > tiny ? v[k] * ck / mag : Complex(0.0);
            }
            dft_inplace(buf, full, +1);
            return crop_real(p, buf);
          },
          [&](const ToyNonlinear& p) -> Vector {
            const Vector h = (p.w1 * x + p.b1).array().tanh().matrix();
            const Vector delta =
                (p.w2.transpose() * v).cwiseProduct((1.0 - h.array().square()).matrix());
            return p.w1.transpose() * delta;
          }},
      params_);
}

Matrix ForwardOperator::matrix() const {
  require(is_linear(), std::string(to_string(kind())) + " is not a linear operator");
  Matrix a(out_dim_, in_dim_);
  Vector e = Vector::Zero(in_dim_);
  for (Index j = 0; j < in_dim_; ++j) {
    e[j] = 1.0;
    a.col(j) = apply(e);
    e[j] = 0.0;
  }
  return a;
}

Measurement synthesize_measurement(const ForwardOperator& op,
                                   const DataVector& x0_true, double sigma,
                                   std::uint64_t noise_seed) {
  require(sigma > 0.0, "synthesize_measurement: sigma must be positive");
  const Vector clean = op.apply(x0_true);
  const Vector noise =
      NormalStream(noise_seed, 0, StreamPurpose::measurement).normal(0, clean.size());
  return Measurement{clean + sigma * noise, sigma};
}

LikelihoodModel::LikelihoodModel(ForwardOperator op, Measurement measurement)
    : op_(std::move(op)), measurement_(std::move(measurement)) {
  require(measurement_.sigma > 0.0 && std::isfinite(measurement_.sigma),
          "likelihood: sigma must be positive and finite");
  require(measurement_.values.size() == op_.out_dim(),
          "likelihood: operator out_dim " + std::to_string(op_.out_dim()) +
              " does not match measurement length " +
              std::to_string(measurement_.values.size()));
  require(measurement_.values.allFinite(), "likelihood: measurement must be finite");
}

double LikelihoodModel::neg_log_likelihood(const DataVector& x0) const {
  const Vector r = measurement_.values - op_.apply(x0);
  return r.squaredNorm() / (2.0 * measurement_.sigma * measurement_.sigma);
}

DataVector LikelihoodModel::data_gradient(const DataVector& x0) const {
  const Vector r = op_.apply(x0) - measurement_.values;
  return op_.pullback(x0, r / (measurement_.sigma * measurement_.sigma));
}

double neg_log_likelihood(const LikelihoodModel& lik, const DataVector& x0) {
  return lik.neg_log_likelihood(x0);
}

NoiseLossEval evaluate_noise_loss(const LikelihoodModel& lik,
                                  const GenerativeMap& map,
                                  const NoiseVector& x1) {
  require(map.dim() == lik.op().in_dim(),
          "noise loss: map dim " + std::to_string(map.dim()) +
              " does not match operator in_dim " + std::to_string(lik.op().in_dim()));
  NoiseLossEval out;
  out.x0 = map.apply(x1);
  const Vector ax = lik.op().apply(out.x0);
  const Vector r = ax - lik.measurement().values;
  const double s2 = lik.sigma() * lik.sigma();
  out.loss = r.squaredNorm() / (2.0 * s2);
  out.grad = map.pullback(x1, lik.op().pullback(out.x0, r / s2));
  return out;
}

NoiseVector grad_noise_loss(const LikelihoodModel& lik, const GenerativeMap& map,
                            const NoiseVector& x1) {
  return evaluate_noise_loss(lik, map, x1).grad;
}

}  // namespace nsl
