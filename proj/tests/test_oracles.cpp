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

#include "nsl/oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "nsl/benchmarks.hpp"
#include "nsl/forward_ops.hpp"
#include "nsl/noise_core.hpp"
#include "nsl/rng.hpp"

namespace nsl {
namespace {

double normal_pdf(double x, double mu, double s) {
  const double u = (x - mu) / s;
  return std::exp(-0.5 * u * u) / (s * std::sqrt(2.0 * std::numbers::pi));
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

DensityGrid normal_grid(double mu, double s, GridAxis axis) {
  return DensityGrid::tabulate({axis}, [=](std::span<const double> x) {
    return normal_pdf(x[0], mu, s);
  });
}

LikelihoodModel scalar_likelihood(double y, double sigma) {
  return LikelihoodModel(ForwardOperator::identity(1), Measurement{Vector::Constant(1, y), sigma});
}

TEST(DensityGrid, TrapezoidIntegral) {
  // Piecewise-linear integrands are exact under the trapezoid rule.
  const auto g = DensityGrid::tabulate({GridAxis{0.0, 2.0, 5}},
                                       [](std::span<const double> x) { return 1.0 + x[0]; });
  EXPECT_NEAR(g.integral(), 4.0, 1e-14);
  // Trapezoid of x(1 + x) at h = 0.5 is 4.75, not the exact 14/3.
  EXPECT_NEAR(g.mean()[0], 4.75 / 4.0, 1e-14);
}

TEST(DensityGrid, RejectsBadValues) {
  EXPECT_THROW(DensityGrid({GridAxis{0, 1, 3}}, {0.0, 0.0, 0.0}), ContractViolation);
  EXPECT_THROW(DensityGrid({GridAxis{0, 1, 3}}, {1.0, -1.0, 0.0}), ContractViolation);
  EXPECT_THROW(DensityGrid({GridAxis{0, 1, 3}}, {1.0, 1.0}), ContractViolation);
  EXPECT_THROW(DensityGrid({GridAxis{0, 1, 1}}, {1.0}), ContractViolation);
}

TEST(DensityGrid, SupportExtension) {
  // N(5, 1) on [-2, 2]: the right boundary carries mass, so the axis grows.
  const auto g = DensityGrid::tabulate_log_with_support(
      {GridAxis{-2.0, 2.0, 801}}, [](std::span<const double> x) { return -0.5 * (x[0] - 5) * (x[0] - 5); });
  EXPECT_LT(g.boundary_ratio(), 1e-10);
  EXPECT_GT(g.axes()[0].hi, 11.0);
  EXPECT_NEAR(g.mean()[0], 5.0, 1e-3);
}

TEST(DensityGrid, SupportErrorWhenCapHit) {
  EXPECT_THROW(DensityGrid::tabulate_log_with_support(
                   {GridAxis{-1.0, 1.0, 101}}, [](std::span<const double>) { return 0.0; }, 1e-10, 3),
               SupportError);
}

TEST(GaussianPosterior, ScalarClosedForm) {
  Matrix m(1, 1);
  m << 2.0;
  const Matrix a = Matrix::Identity(1, 1);
  const auto post = gaussian_posterior_closed_form(m, Vector::Zero(1), a, Vector::Constant(1, 2.0), 1.0);
  // precision 1 + 4 = 5, mean (1/5) * 2 * 2.
  EXPECT_NEAR(post.mean[0], 0.8, 1e-15);
  EXPECT_NEAR(post.covariance(0, 0), 0.2, 1e-15);

  const auto map = GenerativeMap::affine(m, Vector::Zero(1));
  const auto grid = grid_posterior(scalar_likelihood(2.0, 1.0), map, {GridAxis{-8, 8, 16001}});
  EXPECT_NEAR(grid.mean()[0], 0.8, 1e-6);
  EXPECT_NEAR(grid.covariance()(0, 0), 0.2, 1e-6);
}

TEST(GaussianPosterior, ZeroDataGivesZeroMean) {
  Matrix m(2, 2);
  m << 1.0, 0.3, -0.2, 0.8;
  const auto post = gaussian_posterior_closed_form(m, Vector::Zero(2), Matrix::Identity(2, 2),
                                                   Vector::Zero(2), 0.5);
  EXPECT_LT(post.mean.norm(), 1e-15);
}

TEST(GaussianPosterior, LargeSigmaRecoversPrior) {
  Matrix m(2, 2);
  m << 1.0, 0.3, -0.2, 0.8;
  const auto post = gaussian_posterior_closed_form(m, Vector::Ones(2), Matrix::Identity(2, 2),
                                                   Vector::Constant(2, 3.0), 1e6);
  EXPECT_LT(post.mean.norm(), 1e-10);
  EXPECT_LT((post.covariance - Matrix::Identity(2, 2)).norm(), 1e-10);
}

TEST(GaussianPosterior, IdentityHalvesVariance) {
  const auto post = gaussian_posterior_closed_form(Matrix::Identity(2, 2), Vector::Zero(2),
                                                   Matrix::Identity(2, 2), Vector::Zero(2), 1.0);
  EXPECT_LT((post.covariance - 0.5 * Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(GaussianPosterior, GridMatchesAffineBenchmark) {
  const auto b = bench::affine_benchmark();
  const auto ref = b.posterior();
  const auto grid = grid_posterior(b.lik, b.map, {GridAxis{-5, 5, 601}, GridAxis{-5, 5, 601}});
  EXPECT_LT((grid.mean() - ref.mean).norm(), 1e-4);
  EXPECT_LT((grid.covariance() - ref.covariance).norm(), 1e-4);
}

TEST(GaussianPosterior, RejectsBadShapes) {
  EXPECT_THROW(gaussian_posterior_closed_form(Matrix::Identity(2, 2), Vector::Zero(3),
                                              Matrix::Identity(2, 2), Vector::Zero(2), 1.0),
               ContractViolation);
  EXPECT_THROW(gaussian_posterior_closed_form(Matrix::Identity(2, 2), Vector::Zero(2),
                                              Matrix::Identity(2, 2), Vector::Zero(2), 0.0),
               ContractViolation);
}

TEST(TvDistance, Examples) {
  const GridAxis axis{-12, 13, 25001};
  const auto p = normal_grid(0, 1, axis);
  EXPECT_EQ(tv_distance_grid(p, p), 0.0);
  const double closed = 2.0 * std_normal_cdf(0.5) - 1.0;
  EXPECT_NEAR(closed, 0.3829, 1e-4);
  EXPECT_NEAR(tv_distance_grid(p, normal_grid(1, 1, axis)), closed, 1e-6);

  const GridAxis wide{-20, 120, 140001};
  EXPECT_NEAR(tv_distance_grid(normal_grid(0, 1, wide), normal_grid(100, 1, wide)), 1.0, 1e-10);
}

TEST(TvDistance, MetricProperties) {
  const GridAxis axis{-15, 15, 3001};
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> mu(-3, 3), sd(0.3, 2.5);
  for (int rep = 0; rep < 30; ++rep) {
    const auto p = normal_grid(mu(gen), sd(gen), axis);
    const auto q = normal_grid(mu(gen), sd(gen), axis);
    const auto r = normal_grid(mu(gen), sd(gen), axis);
    const double pq = tv_distance_grid(p, q);
    EXPECT_DOUBLE_EQ(pq, tv_distance_grid(q, p));
    EXPECT_GE(pq, 0.0);
    EXPECT_LE(pq, 1.0 + 1e-12);
    EXPECT_LE(pq, tv_distance_grid(p, r) + tv_distance_grid(r, q) + 1e-12);
  }
}

TEST(TvDistance, ScaleInvariantInputs) {
  const GridAxis axis{-10, 10, 2001};
  const auto p = normal_grid(0, 1, axis);
  std::vector<double> scaled = p.values();
  for (double& v : scaled) v *= 37.0;
  EXPECT_NEAR(tv_distance_grid(p, DensityGrid({axis}, scaled)), 0.0, 1e-14);
  EXPECT_THROW(tv_distance_grid(p, normal_grid(0, 1, GridAxis{-10, 10, 2000})), ContractViolation);
}

TEST(ConditionNumber, UnitGaussianExamples) {
  const auto p_data = normal_grid(0, 1, GridAxis{-30, 30, 6001});
  for (const double y : {0.0, 4.0}) {
    const auto lik = [y](std::span<const double> x) { return normal_pdf(y, x[0], 1.0); };
    const auto rep = condition_number(lik, p_data);
    // sup = N(0; 0, 1), evidence = N(y; 0, 2).
    const double expect = std::sqrt(2.0) * std::exp(y * y / 4.0);
    EXPECT_NEAR(rep.kappa_y / expect, 1.0, 1e-4) << "y=" << y;
    EXPECT_NEAR(rep.sup_likelihood, 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-6);
    EXPECT_NEAR(rep.evidence, normal_pdf(y, 0.0, std::sqrt(2.0)), 1e-8);
  }
  EXPECT_NEAR(std::sqrt(2.0) * std::exp(4.0), 77.2, 0.05);
}

TEST(ConditionNumber, ConstantLikelihoodIsOne) {
  const auto p_data = normal_grid(0.3, 0.7, GridAxis{-10, 10, 2001});
  const auto rep = condition_number([](std::span<const double>) { return 0.25; }, p_data);
  EXPECT_NEAR(rep.kappa_y, 1.0, 1e-12);
}

TEST(ConditionNumber, AtLeastOne) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-4, 4), s(0.1, 3);
  const GridAxis axis{-30, 30, 4001};
  for (int rep = 0; rep < 40; ++rep) {
    const auto p_data = normal_grid(u(gen), s(gen), axis);
    const double y = u(gen);
    const double noise = s(gen);
    const auto r = condition_number(
        [=](std::span<const double> x) { return normal_pdf(y, x[0], noise); }, p_data);
    EXPECT_GE(r.kappa_y, 1.0 - 1e-12);
  }
}

TEST(ConditionNumber, ZeroEvidenceIsIllPosed) {
  // Prior mass on x < 0 only, likelihood supported on x > 1.
  const auto p_data = DensityGrid::tabulate({GridAxis{-3, 3, 601}}, [](std::span<const double> x) {
    return x[0] < 0.0 ? 1.0 : 0.0;
  });
  EXPECT_THROW(condition_number([](std::span<const double> x) { return x[0] > 1.0 ? 1.0 : 0.0; }, p_data),
               IllPosedError);
}

TEST(TheoremBound, EqualPriorsGiveZero) {
  const auto prior = [](std::span<const double> x) { return normal_pdf(x[0], 0, 1); };
  const auto lik = [](std::span<const double> x) { return normal_pdf(1.0, x[0], 0.5); };
  const auto rep = check_theorem_bound(prior, prior, lik, bench::theorem_grid());
  EXPECT_EQ(rep.eps_prior, 0.0);
  EXPECT_EQ(rep.tv_posteriors, 0.0);
  EXPECT_GE(rep.slack, 0.0);
}

TEST(TheoremBound, ShiftedPrior) {
  const auto p = [](std::span<const double> x) { return normal_pdf(x[0], 0, 1); };
  const auto q = [](std::span<const double> x) { return normal_pdf(x[0], 0.2, 1); };
  const auto lik = [](std::span<const double> x) { return normal_pdf(0.5, x[0], 1.0); };
  const auto rep = check_theorem_bound(p, q, lik, bench::theorem_grid());
  EXPECT_NEAR(rep.eps_prior, 2.0 * std_normal_cdf(0.1) - 1.0, 1e-6);
  EXPECT_LE(rep.tv_posteriors, rep.bound_value);
  // Both posteriors are Gaussian with variance 1/2, means 0.25 and 0.35.
  EXPECT_NEAR(rep.tv_posteriors, 2.0 * std_normal_cdf(0.05 / std::sqrt(0.5)) - 1.0, 1e-6);
}

TEST(TheoremBound, BimodalPriorConditioning) {
  bench::GaussianMixture data{{0.5, 0.5}, {-2.0, 2.0}, {0.5, 0.5}};
  const auto p = [&](std::span<const double> x) { return data.pdf(x[0]); };
  const auto q = [](std::span<const double> x) { return normal_pdf(x[0], 0.0, 2.0); };
  auto at = [&](double y) {
    return check_theorem_bound(p, q, [y](std::span<const double> x) { return normal_pdf(y, x[0], 0.1); },
                               bench::theorem_grid());
  };
  const auto on_mode = at(2.0);
  EXPECT_GE(on_mode.slack, 0.0);
  // By symmetry of the data prior the two modes are equally well conditioned.
  EXPECT_NEAR(at(-2.0).kappa_y / on_mode.kappa_y, 1.0, 1e-6);
  // A likelihood peaked where the data prior is thin (the valley between the
  // modes) is far worse conditioned.
  const auto valley = at(0.0);
  EXPECT_GE(valley.slack, 0.0);
  EXPECT_GT(valley.kappa_y, 10.0 * on_mode.kappa_y);
}

TEST(TheoremBound, RandomInstances) {
  for (const auto& inst : bench::theorem_instances(50, 7)) {
    const auto rep = check_theorem_bound(
        [&](std::span<const double> x) { return inst.p_data.pdf(x[0]); },
        [&](std::span<const double> x) { return inst.model_prior.pdf(x[0]); },
        [&](std::span<const double> x) { return inst.likelihood(x[0]); }, bench::theorem_grid());
    EXPECT_GE(rep.kappa_y, 1.0);
    EXPECT_LE(rep.tv_posteriors, rep.bound_value + 10.0 * rep.quadrature_error);
  }
}

TEST(TheoremBound, PriorOutsideGridRejected) {
  const auto p = [](std::span<const double> x) { return normal_pdf(x[0], 0, 1); };
  const auto q = [](std::span<const double> x) { return normal_pdf(x[0], 29, 1); };
  const auto lik = [](std::span<const double>) { return 1.0; };
  EXPECT_THROW(check_theorem_bound(p, q, lik, bench::theorem_grid()), SupportError);
}

TEST(Dpi, IdentityPreservesTv) {
  const GridAxis axis{-12, 12, 4801};
  const auto p = normal_grid(0, 1, axis);
  const auto q = normal_grid(0.8, 1.3, axis);
  const auto r = check_dpi(p, q, [](double x) { return x; }, 200, 100000, 4);
  EXPECT_TRUE(r.holds);
  EXPECT_NEAR(r.tv_after, r.tv_before, r.tolerance);
  EXPECT_NEAR(r.tolerance, 5.0 / std::sqrt(1e5), 1e-15);
}

TEST(Dpi, AbsoluteValueCollapsesMirrorPair) {
  const GridAxis axis{-12, 12, 4801};
  const auto r = check_dpi(normal_grid(1, 1, axis), normal_grid(-1, 1, axis),
                           [](double x) { return std::abs(x); }, 100, 100000, 9);
  EXPECT_NEAR(r.tv_before, 2.0 * std_normal_cdf(1.0) - 1.0, 1e-5);
  EXPECT_NEAR(std::round(r.tv_before * 1e4) / 1e4, 0.6827, 1e-12);
  EXPECT_LT(r.tv_after, r.tolerance);
  EXPECT_TRUE(r.holds);
}

TEST(Dpi, BenchmarkTriples) {
  const auto triples = bench::dpi_triples();
  ASSERT_EQ(triples.size(), 20u);
  const GridAxis axis{-15, 15, 6001};
  for (const auto& t : triples) {
    const auto p = DensityGrid::tabulate({axis}, [&](std::span<const double> x) { return t.p.pdf(x[0]); });
    const auto q = DensityGrid::tabulate({axis}, [&](std::span<const double> x) { return t.q.pdf(x[0]); });
    const auto r = check_dpi(p, q, t.phi, 200, 100000, 5);
    EXPECT_TRUE(r.holds) << t.name << " before=" << r.tv_before << " after=" << r.tv_after;
  }
}

TEST(SampleGrid, InverseCdf) {
  const auto p = DensityGrid::tabulate({GridAxis{0.0, 1.0, 3}}, [](std::span<const double>) { return 1.0; });
  const std::vector<double> u{0.0, 0.25, 0.5, 1.0};
  const auto x = sample_grid_1d(p, u);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(x[i], u[i], 1e-14);
}

TEST(Kde, SilvermanBandwidth) {
  const std::vector<double> s{-1.0, 1.0};
  // sd = sqrt(2), IQR (linear interpolation) = 1 → min = 1/1.34.
  EXPECT_NEAR(silverman_bandwidth(s), 0.9 * (1.0 / 1.34) * std::pow(2.0, -0.2), 1e-12);
  EXPECT_THROW(silverman_bandwidth(std::vector<double>{1.0}), ContractViolation);
  EXPECT_THROW(silverman_bandwidth(std::vector<double>{2.0, 2.0, 2.0}), ContractViolation);
}

TEST(Kde, RecoversGaussian) {
  NormalStream stream(17, 0, StreamPurpose::generic);
  std::vector<double> s(20000);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = stream.normal(i, 1)[0];
  const GridAxis axis{-8, 8, 1601};
  const auto kde = kde_grid_1d(s, axis);
  EXPECT_NEAR(kde.integral(), 1.0, 1e-3);
  EXPECT_LT(tv_distance_grid(kde, normal_grid(0, 1, axis)), 0.03);
}

TEST(PushforwardDensity, AffineMatchesChangeOfVariables) {
  Matrix m(1, 1);
  m << -2.0;
  const auto map = GenerativeMap::affine(m, Vector::Constant(1, 1.0));
  const GridAxis axis{-14, 16, 3001};
  const auto g = pushforward_density_1d(map, [](double z) { return -0.5 * z * z; }, axis, {-12.0, 12.0});
  EXPECT_LT(tv_distance_grid(g, normal_grid(1.0, 2.0, axis)), 1e-6);
  EXPECT_NEAR(g.mean()[0], 1.0, 1e-6);
}

TEST(PushforwardDensity, DataPosteriorMatchesClosedForm) {
  Matrix m(1, 1);
  m << 2.0;
  const auto map = GenerativeMap::affine(m, Vector::Zero(1));
  const GridAxis axis{-10, 10, 4001};
  const auto g = grid_posterior_data_1d(scalar_likelihood(2.0, 1.0), map, axis);
  // x0 = 2 z with z ~ N(0.8, 0.2).
  EXPECT_NEAR(g.mean()[0], 1.6, 1e-5);
  EXPECT_NEAR(g.covariance()(0, 0), 0.8, 1e-5);
}

TEST(Autocorrelation, IndependentAndAr1) {
  NormalStream stream(23, 0, StreamPurpose::generic);
  const std::size_t n = 200000;
  std::vector<double> iid(n), ar(n);
  double prev = 0.0;
  const double rho = 0.5;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = stream.normal(i, 1)[0];
    iid[i] = e;
    prev = rho * prev + std::sqrt(1.0 - rho * rho) * e;
    ar[i] = prev;
  }
  EXPECT_NEAR(integrated_autocorrelation_time(iid), 1.0, 0.05);
  // (1 + rho) / (1 - rho).
  EXPECT_NEAR(integrated_autocorrelation_time(ar), 3.0, 0.15);
}

TEST(MomentEstimate, Examples) {
  std::vector<Vector> same(5, Vector::Constant(2, 3.0));
  const auto a = moment_estimate(same);
  EXPECT_EQ(a.mean, Vector::Constant(2, 3.0));
  EXPECT_EQ(a.covariance, Matrix::Zero(2, 2));

  const std::vector<Vector> two{Vector::Zero(2), Vector::Constant(2, 2.0)};
  const auto b = moment_estimate(two);
  EXPECT_EQ(b.mean, Vector::Ones(2));
  EXPECT_EQ(b.covariance, Matrix::Constant(2, 2, 2.0));

  EXPECT_THROW(moment_estimate(std::vector<Vector>{Vector::Zero(2)}), ContractViolation);
  EXPECT_THROW(moment_estimate(std::vector<Vector>{Vector::Zero(2), Vector::Zero(3)}), ContractViolation);
}

TEST(MomentEstimate, NormalDraws) {
  NormalStream stream(29, 0, StreamPurpose::generic);
  std::vector<Vector> s;
  s.reserve(100000);
  for (std::uint64_t i = 0; i < 100000; ++i) s.push_back(stream.normal(i, 2));
  const auto m = moment_estimate(s);
  for (Index k = 0; k < 2; ++k) {
    EXPECT_LT(std::abs(m.mean[k]), 4.0 * m.std_errors[k]);
    EXPECT_NEAR(m.std_errors[k], 1.0 / std::sqrt(1e5), 2e-4);
    EXPECT_NEAR(m.covariance(k, k), 1.0, 0.02);
  }
  EXPECT_NEAR(m.covariance(0, 1), 0.0, 0.02);
}

}  // namespace
}  // namespace nsl
