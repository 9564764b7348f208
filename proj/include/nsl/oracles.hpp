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

#ifndef NSL_ORACLES_HPP_
#define NSL_ORACLES_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "nsl/forward_ops.hpp"
#include "nsl/noise_core.hpp"
#include "nsl/types.hpp"

namespace nsl {

// Uniform axis with n >= 2 nodes lo, lo + h, ..., hi.
struct GridAxis {
  double lo = -1.0;
  double hi = 1.0;
  Index n = 2;

  double step() const { return (hi - lo) / static_cast<double>(n - 1); }
  double node(Index i) const { return lo + static_cast<double>(i) * step(); }
  bool operator==(const GridAxis&) const = default;
};

using GridSpec = std::vector<GridAxis>;
using PointFunction = std::function<double(std::span<const double>)>;

// Unnormalized density tabulated on a tensor grid (1 to 3 dimensions,
// row-major, last axis fastest). Integration is by the trapezoid rule.
class DensityGrid {
 public:
  DensityGrid(GridSpec axes, std::vector<double> values);

  // Evaluates f at every node.
  static DensityGrid tabulate(GridSpec axes, const PointFunction& f);
  // Tabulates exp(log_f - max log_f); handles densities that underflow.
  static DensityGrid tabulate_log(GridSpec axes, const PointFunction& log_f);

  // Widens every axis whose boundary carries more than `rel_tol` times the
  // peak value by half its width on each side, up to `max_extensions`
  // times; node counts stay fixed. Throws SupportError when the cap is hit.
  static DensityGrid tabulate_log_with_support(GridSpec axes,
                                               const PointFunction& log_f,
                                               double rel_tol = 1e-10,
                                               int max_extensions = 10);

  int dim() const { return static_cast<int>(axes_.size()); }
  const GridSpec& axes() const { return axes_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  std::vector<double> node(std::size_t flat) const;
  // Trapezoid weight of a node (product of per-axis weights).
  double weight(std::size_t flat) const;
  double integral() const;
  // Values divided by the trapezoid integral.
  std::vector<double> normalized() const;
  // Largest boundary value divided by the peak value.
  double boundary_ratio() const;

  Vector mean() const;
  Matrix covariance() const;

  bool same_layout(const DensityGrid& other) const { return axes_ == other.axes_; }

 private:
  GridSpec axes_;
  std::vector<double> values_;
};

struct GaussianPosterior {
  Vector mean;
  Matrix covariance;
};

// Noise-space posterior for Phi(x) = M x + b, A linear, Gaussian noise:
// precision I + (AM)^T (AM) / sigma^2, mean Sigma (AM)^T (y - A b) / sigma^2.
GaussianPosterior gaussian_posterior_closed_form(const Matrix& m, const Vector& b,
                                                 const Matrix& a, const Vector& y,
                                                 double sigma);

// exp(-||x1||^2 / 2 - L_y(Phi(x1))) on the grid (dim <= 3), extended until the
// boundary carries < 1e-10 of the peak.
DensityGrid grid_posterior(const LikelihoodModel& lik, const GenerativeMap& map,
                           const GridSpec& spec);

// Data-space density of Phi_# p for a monotone 1-D map, by change of
// variables: p(Phi^-1(x)) / |Phi'(Phi^-1(x))|, zero outside the image of
// `noise_bracket`. `noise_log_density` may be unnormalized.
DensityGrid pushforward_density_1d(const GenerativeMap& map,
                                   const std::function<double(double)>& noise_log_density,
                                   const GridAxis& data_axis,
                                   std::pair<double, double> noise_bracket);

// Data-space model posterior for a monotone 1-D map.
DensityGrid grid_posterior_data_1d(const LikelihoodModel& lik, const GenerativeMap& map,
                                   const GridAxis& data_axis,
                                   std::pair<double, double> noise_bracket = {-12.0, 12.0});

// 1/2 int |p_hat - q_hat| with both grids independently normalized.
double tv_distance_grid(const DensityGrid& p, const DensityGrid& q);

struct ConditionReport {
  double kappa_y = 0.0;
  double sup_likelihood = 0.0;
  double evidence = 0.0;
  double eps_prior = 0.0;
  double bound_value = 0.0;  // 2 kappa_y eps
  double tv_posteriors = 0.0;
  double quadrature_error = 0.0;
  double slack = 0.0;  // bound + 10 * quadrature_error - tv
};

// kappa_y = max_grid p(y|x) / int p(y|x) p_data_hat(x) dx.
ConditionReport condition_number(const PointFunction& likelihood,
                                 const DensityGrid& p_data);

// Grid-level check: eps, both posteriors by likelihood weighting, kappa_y,
// and tv_posteriors <= 2 kappa_y eps + 10 * quad_tol.
ConditionReport check_theorem_bound(const DensityGrid& p_data,
                                    const DensityGrid& model_prior,
                                    const PointFunction& likelihood,
                                    double quad_tol = 0.0);

// Function-level check; the quadrature error is the change in tv and bound
// between n and 2n - 1 nodes per axis. Throws TheoremViolation on failure.
ConditionReport check_theorem_bound(const PointFunction& p_data,
                                    const PointFunction& model_prior,
                                    const PointFunction& likelihood,
                                    const GridSpec& spec);

struct DpiResult {
  double tv_before = 0.0;
  double tv_after = 0.0;
  double tolerance = 0.0;  // 5 / sqrt(n_samples)
  bool holds = false;
};

// Matched inverse-CDF samples from 1-D grids p and q (common uniforms),
// pushed through phi and histogrammed on a shared range.
DpiResult check_dpi(const DensityGrid& p, const DensityGrid& q,
                    const std::function<double(double)>& phi, int n_bins,
                    std::int64_t n_samples = 100000, std::uint64_t seed = 0);

// Inverse-CDF draws from a 1-D grid density, piecewise-linear CDF.
std::vector<double> sample_grid_1d(const DensityGrid& p, std::span<const double> uniforms);

// Gaussian KDE, Silverman bandwidth 0.9 min(sd, IQR / 1.34) n^(-1/5).
double silverman_bandwidth(std::span<const double> samples);
DensityGrid kde_grid_1d(std::span<const double> samples, const GridAxis& axis,
                        double bandwidth = 0.0);

struct MomentEstimate {
  Vector mean;
  Matrix covariance;
  Vector std_errors;
  Vector effective_sample_size;
};

// Initial-positive-sequence integrated autocorrelation time of one series.
double integrated_autocorrelation_time(std::span<const double> series);

// Mean, unbiased covariance, and autocorrelation-aware standard errors.
MomentEstimate moment_estimate(std::span<const Vector> samples);

}  // namespace nsl

#endif  // NSL_ORACLES_HPP_
