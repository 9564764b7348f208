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

// Verification suites. The measure_* functions return raw measurements so
// callers can apply their own thresholds; run_verify_suite applies the
// default ones.

#ifndef NSL_VERIFY_HPP_
#define NSL_VERIFY_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nsl/forward_ops.hpp"
#include "nsl/noise_core.hpp"
#include "nsl/oracles.hpp"
#include "nsl/samplers.hpp"

namespace nsl {

struct CheckResult {
  std::string suite;
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

// "PASS suite/name measured=... tol=... detail".
std::string format_check(const CheckResult& r);

// pullback, adjoint, drift, equilibrium, theorem, dpi, nfe.
const std::vector<std::string>& verify_suite_names();
// Runs one suite or "all". Throws ContractViolation on an unknown name.
std::vector<CheckResult> run_verify_suite(const std::string& name);

struct GradientCheck {
  double max_rel_error = 0.0;
  int points = 0;
  int resampled = 0;  // draws rejected near non-smooth loci
};

// grad_noise_loss against central differences (h = 1e-5) of
// neg_log_likelihood(Phi(z)) at `points` draws z ~ N(0, I). Draws with an
// hdr_clip input within 1e-3 of a clip boundary or a DFT bin with modulus
// below 1e-6 are redrawn. Error is ||g - fd|| / max(||fd||, 1e-6).
GradientCheck measure_noise_gradient(const GenerativeMap& map,
                                     const LikelihoodModel& lik, int points,
                                     std::uint64_t seed);

struct DriftScoreCheck {
  double rel_error = 0.0;        // ||drift - score|| / ||score|| over all points
  double max_point_error = 0.0;  // max |drift - score| / max(|score|, 1)
  int points = 0;
};

// Sampler drift -(z + grad L) against the central difference of the log of
// the tabulated noise posterior, at `points` interior grid nodes.
DriftScoreCheck measure_drift_score(const GenerativeMap& map,
                                    const LikelihoodModel& lik, int points);

struct EquilibriumMeasure {
  Vector mean;
  Matrix covariance;
  GaussianPosterior reference;
  Vector mean_error_in_std;  // |mean - mu_i| / sqrt(Sigma_ii)
  double cov_rel_frobenius = 0.0;
  std::int64_t samples = 0;
  bool diverged = false;
};

// Pooled noise-space samples of `chains` independent chains on the affine
// d = 2 benchmark against its closed-form posterior.
EquilibriumMeasure measure_equilibrium(Scheme scheme, double tau, std::int64_t n_steps,
                                       std::int64_t burn_in, int chains,
                                       std::uint64_t seed, std::int64_t thinning = 10);

struct CompositeBoundCheck {
  std::string name;
  double tv_total = 0.0;     // TV(true data posterior, sample KDE)
  double bound = 0.0;        // 2 kappa eps
  double eps_sampler = 0.0;  // TV(noise posterior, sample KDE) in noise space
  double kappa = 0.0;
  double eps = 0.0;
  double quadrature_error = 0.0;
};

// Ten 1-D affine problems with deliberately short chains, started from the
// prior, and a mismatched data prior.
std::vector<CompositeBoundCheck> measure_composite_bounds(int ensemble = 4000);

struct WelchResult {
  double mean_a = 0.0;
  double mean_b = 0.0;
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;  // one-sided, H1: mean_a > mean_b
};
WelchResult welch_one_sided(std::span<const double> a, std::span<const double> b);

struct DiversityTrend {
  std::vector<double> large_tau;
  std::vector<double> small_tau;
  WelchResult test;
  // Mean over seeds of the RMS distance of a chain's samples to their own
  // mean, and the same quantity for the exact data-space posterior.
  double large_tau_spread = 0.0;
  double small_tau_spread = 0.0;
  double posterior_spread = 0.0;
};

// Diversity score of one default-config chain per seed on the affine
// benchmark, at two step sizes.
DiversityTrend measure_diversity_trend(double tau_large, double tau_small, int seeds);

}  // namespace nsl

#endif  // NSL_VERIFY_HPP_
