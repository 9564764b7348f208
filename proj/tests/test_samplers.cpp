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

#include "nsl/samplers.hpp"

#include <array>
#include <cmath>

#include <gtest/gtest.h>

#include "nsl/benchmarks.hpp"
#include "nsl/rng.hpp"

namespace nsl {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// L == 0 everywhere: a mask that observes nothing.
LikelihoodModel flat_likelihood(Index d) {
  return LikelihoodModel(ForwardOperator::inpaint(std::vector<std::uint8_t>(static_cast<std::size_t>(d), 0)),
                         Measurement{Vector::Zero(d), 1.0});
}

LangevinState hand_state(const Vector& z, const Vector& g, std::uint64_t seed = 1) {
  LangevinState s;
  s.z = z;
  s.g = g;
  s.has_gradient = true;
  s.rng = NormalStream(seed, 0, StreamPurpose::langevin);
  return s;
}

TEST(EmUpdate, Examples) {
  EXPECT_EQ(em_update(vec({2, 0}), vec({0, 0}), 0.5, vec({0, 0})), vec({1, 0}));
  const Vector z = em_update(vec({1, 1}), vec({1, -1}), 0.1, vec({0, 0}));
  EXPECT_NEAR(z[0], 0.8, 1e-15);
  EXPECT_NEAR(z[1], 1.0, 1e-15);
}

TEST(EiUpdate, Example) {
  const Vector z = ei_update(vec({2}), vec({1}), std::log(2.0), vec({0}));
  EXPECT_NEAR(z[0], 0.5, 1e-15);
}

TEST(EmStep, UsesStreamNoiseAndRefreshesGradient) {
  const auto b = bench::affine_benchmark();
  const Vector z = vec({0.4, -0.3});
  const Vector g = vec({1.5, 0.25});
  LangevinState s = hand_state(z, g, 9);
  s.step = 37;
  const auto next = em_step(s, b.lik, b.map, 0.01);
  const Vector xi = NormalStream(9, 0, StreamPurpose::langevin).normal(37, 2);
  const Vector expect = (1.0 - 0.01) * z - 0.01 * g + std::sqrt(0.02) * xi;
  EXPECT_LT((next.z - expect).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(next.step, 38);
  EXPECT_EQ(next.gradient_evals, 1);
  EXPECT_EQ(next.g, grad_noise_loss(b.lik, b.map, next.z));
  EXPECT_EQ(next.x0, b.map.apply(next.z));
}

TEST(EmStep, RejectsBadTau) {
  const auto lik = flat_likelihood(2);
  const auto map = GenerativeMap::identity(2);
  const auto s = start_chain(Vector::Zero(2), lik, map, NormalStream(1, 0, StreamPurpose::langevin));
  EXPECT_THROW(em_step(s, lik, map, 1.0), ContractViolation);
  EXPECT_THROW(em_step(s, lik, map, 0.0), ContractViolation);
  EXPECT_THROW(ei_step(s, lik, map, -0.1), ContractViolation);
  EXPECT_NO_THROW(ei_step(s, lik, map, 2.0));
}

TEST(StartChain, CachesGradient) {
  const auto b = bench::affine_benchmark();
  const auto s = start_chain(vec({0.2, 0.1}), b.lik, b.map, NormalStream(1, 0, StreamPurpose::langevin));
  EXPECT_TRUE(s.has_gradient);
  EXPECT_EQ(s.step, 0);
  EXPECT_EQ(s.gradient_evals, 1);
  EXPECT_EQ(s.g, grad_noise_loss(b.lik, b.map, vec({0.2, 0.1})));
}

TEST(EiStep, SmallTauAgreesWithEm) {
  const auto lik = flat_likelihood(2);
  const Vector z = vec({0.6, -0.8});
  const Vector g = vec({-0.8, 0.6});
  const Vector xi = vec({0.6, 0.8});
  const double tau = 1e-4;
  EXPECT_LT((ei_update(z, g, tau, xi) - em_update(z, g, tau, xi)).norm(), 1e-6);
  // O(tau^2) in the drift part alone.
  EXPECT_LT((ei_update(z, g, tau, Vector::Zero(2)) - em_update(z, g, tau, Vector::Zero(2))).norm(), tau * tau);
}

double increment_variance(Scheme scheme, double tau, int steps) {
  const auto lik = flat_likelihood(2);
  const auto map = GenerativeMap::identity(2);
  auto s = start_chain(Vector::Zero(2), lik, map, NormalStream(3, 0, StreamPurpose::langevin));
  const double decay = scheme == Scheme::em ? 1.0 - tau : std::exp(-tau);
  double ss = 0.0;
  for (int i = 0; i < steps; ++i) {
    const auto next = scheme == Scheme::em ? em_step(s, lik, map, tau) : ei_step(s, lik, map, tau);
    ss += (next.z - decay * s.z).squaredNorm();
    s = next;
  }
  return ss / (2.0 * steps);
}

TEST(EmStep, IncrementVariance) {
  constexpr int n = 100000;
  const double v = increment_variance(Scheme::em, 0.1, n);
  // Increments are iid N(0, 2 tau); two coordinates per step.
  EXPECT_NEAR(v, 0.2, 3.0 * 0.2 * std::sqrt(2.0 / (2.0 * n)));
}

TEST(EiStep, IncrementVariance) {
  constexpr int n = 100000;
  const double expect = 1.0 - std::exp(-0.2);
  const double v = increment_variance(Scheme::ei, 0.1, n);
  EXPECT_NEAR(v, expect, 3.0 * expect * std::sqrt(2.0 / (2.0 * n)));
}

// With g == 0 the EM chain is an AR(1) process with stationary variance
// 2 tau / (1 - (1 - tau)^2); EI is exact for the linear part.
TEST(Schemes, StationaryVarianceWithoutLikelihood) {
  const auto lik = flat_likelihood(1);
  const auto map = GenerativeMap::identity(1);
  for (const auto scheme : {Scheme::em, Scheme::ei}) {
    for (const double tau : {0.1, 0.02}) {
      const double rho = scheme == Scheme::em ? 1.0 - tau : std::exp(-tau);
      const double expect = scheme == Scheme::em ? 1.0 / (1.0 - tau / 2.0) : 1.0;
      auto s = start_chain(NormalStream(4, 0, StreamPurpose::chain_init).normal(0, 1) * std::sqrt(expect), lik,
                           map, NormalStream(4, 0, StreamPurpose::langevin));
      constexpr int n = 200000;
      double sum = 0.0;
      double ss = 0.0;
      for (int i = 0; i < n; ++i) {
        s = scheme == Scheme::em ? em_step(s, lik, map, tau) : ei_step(s, lik, map, tau);
        sum += s.z[0];
        ss += s.z[0] * s.z[0];
      }
      const double mean = sum / n;
      const double var = ss / n - mean * mean;
      // AR(1) sample variance: Var ~ 2 v^2 (1 + rho^2) / (n (1 - rho^2)).
      const double se = expect * std::sqrt(2.0 * (1.0 + rho * rho) / (n * (1.0 - rho * rho)));
      EXPECT_NEAR(var, expect, 4.0 * se) << to_string(scheme) << " tau " << tau;
      if (scheme == Scheme::em && tau <= 0.02) {
        EXPECT_GE(var, 0.95);
        EXPECT_LE(var, 1.05);
      }
    }
  }
}

TEST(AdamWarmStart, ZeroStepsIsIdentity) {
  const auto b = bench::affine_benchmark();
  SamplerConfig cfg;
  cfg.warm_steps = 0;
  const auto r = adam_warm_start(vec({1.5, -2.0}), b.lik, b.map, cfg);
  EXPECT_EQ(r.z, vec({1.5, -2.0}));
  EXPECT_EQ(r.gradient_evals, 0);
}

TEST(AdamWarmStart, FirstStepIsSignStep) {
  // L = (z - 1)^2 / 2 with gradient 4 at z0 = 5.
  const LikelihoodModel lik(ForwardOperator::identity(1), Measurement{vec({1.0}), 1.0});
  SamplerConfig cfg;
  cfg.warm_steps = 1;
  cfg.adam_lr = 0.1;
  const auto r = adam_warm_start(vec({5.0}), lik, GenerativeMap::identity(1), cfg);
  EXPECT_NEAR(r.z[0], 5.0 - 0.1 * 4.0 / (4.0 + 1e-8), 1e-14);
  EXPECT_EQ(r.gradient_evals, 1);
}

TEST(AdamWarmStart, QuadraticDecreases) {
  const LikelihoodModel lik(ForwardOperator::identity(2), Measurement{Vector::Zero(2), 1.0});
  SamplerConfig cfg;  // K = 500, lr = 5e-3
  const Vector z0 = vec({10, 10});
  const auto r = adam_warm_start(z0, lik, GenerativeMap::identity(2), cfg);
  EXPECT_LT(r.z.norm(), z0.norm());
  ASSERT_EQ(r.loss_trace.size(), 500u);
  EXPECT_EQ(r.gradient_evals, 500);
  for (std::size_t i = 0; i + 50 < r.loss_trace.size(); ++i) ASSERT_LT(r.loss_trace[i + 50], r.loss_trace[i]);
}

TEST(AdamWarmStart, NonFiniteLossDiverges) {
  Matrix m(1, 1);
  m(0, 0) = 1e200;
  const LikelihoodModel lik(ForwardOperator::identity(1), Measurement{vec({0.0}), 1e-100});
  SamplerConfig cfg;
  cfg.warm_steps = 3;
  EXPECT_THROW(adam_warm_start(vec({1.0}), lik, GenerativeMap::affine(m, Vector::Zero(1)), cfg), DivergenceError);
}

TEST(SamplerConfig, Validation) {
  SamplerConfig ok;
  EXPECT_NO_THROW(ok.validate());
  auto bad = [](auto mutate) {
    SamplerConfig c;
    mutate(c);
    return c;
  };
  EXPECT_THROW(bad([](auto& c) { c.tau = 0.0; }).validate(), ContractViolation);
  EXPECT_THROW(bad([](auto& c) { c.tau = 1.0; }).validate(), ContractViolation);
  EXPECT_THROW(bad([](auto& c) { c.n_steps = 0; }).validate(), ContractViolation);
  EXPECT_THROW(bad([](auto& c) { c.burn_in = c.n_steps; }).validate(), ContractViolation);
  EXPECT_THROW(bad([](auto& c) { c.warm_steps = -1; }).validate(), ContractViolation);
  EXPECT_THROW(bad([](auto& c) { c.thinning = 0; }).validate(), ContractViolation);
  EXPECT_THROW(bad([](auto& c) { c.adam_beta1 = 1.0; }).validate(), ContractViolation);
  EXPECT_EQ(ok.retained_count(), 150);
}

TEST(RunChain, SingleStepIsComposition) {
  const auto b = bench::affine_benchmark();
  SamplerConfig cfg;
  cfg.warm_steps = 0;
  cfg.n_steps = 1;
  cfg.burn_in = 0;
  cfg.thinning = 1;
  cfg.seed = 12;
  cfg.tau = 0.05;
  const auto r = run_chain(b.map, b.lik, cfg);
  const Vector z0 = NormalStream(12, 0, StreamPurpose::chain_init).normal(0, 2);
  const auto s = start_chain(z0, b.lik, b.map, NormalStream(12, 0, StreamPurpose::langevin));
  const auto next = em_step(s, b.lik, b.map, 0.05);
  ASSERT_EQ(r.samples.size(), 1u);
  EXPECT_EQ(r.samples[0], b.map.apply(next.z));
  EXPECT_EQ(r.sample_steps[0], 1);
}

TEST(RunChain, NfeAccounting) {
  const auto b = bench::affine_benchmark();
  SamplerConfig cfg;
  cfg.warm_steps = 800;
  cfg.n_steps = 10;
  cfg.burn_in = 0;
  cfg.thinning = 1;
  const auto r = run_chain(b.map, b.lik, cfg);
  EXPECT_EQ(r.nfe_total, 810);
  EXPECT_DOUBLE_EQ(r.nfe_per_sample, 81.0);

  const auto two = make_two_step_map(GenerativeMap::random_mlp(2, {3}, 1), 2, 0.5);
  const auto r2 = run_chain(two, b.lik, cfg);
  EXPECT_EQ(r2.nfe_total, 1620);
  EXPECT_DOUBLE_EQ(r2.nfe_per_sample, 162.0);
}

TEST(RunChain, RetentionSchedule) {
  const auto b = bench::affine_benchmark();
  SamplerConfig cfg;
  cfg.warm_steps = 5;
  cfg.n_steps = 100;
  cfg.burn_in = 20;
  cfg.thinning = 7;
  const auto r = run_chain(b.map, b.lik, cfg, {0, true});
  ASSERT_EQ(r.samples.size(), static_cast<std::size_t>(cfg.retained_count()));
  ASSERT_TRUE(r.noise_trace.has_value());
  for (std::size_t k = 0; k < r.samples.size(); ++k) {
    EXPECT_EQ(r.sample_steps[k], 20 + 7 * static_cast<std::int64_t>(k + 1));
    EXPECT_EQ(r.samples[k], b.map.apply((*r.noise_trace)[k]));
  }
}

TEST(RunChain, Deterministic) {
  const auto maps = bench::gradient_maps();
  const auto op = ForwardOperator::hdr_clip(16);
  const LikelihoodModel lik(op, Measurement{Vector::Constant(16, 0.3), 0.1});
  SamplerConfig cfg;
  cfg.n_steps = 300;
  cfg.warm_steps = 50;
  cfg.burn_in = 100;
  cfg.seed = 99;
  for (const auto& m : maps) {
    const auto a = run_chain(m.map, lik, cfg);
    const auto b = run_chain(m.map, lik, cfg);
    ASSERT_EQ(a.samples.size(), b.samples.size());
    for (std::size_t k = 0; k < a.samples.size(); ++k) ASSERT_EQ(a.samples[k], b.samples[k]);
  }
}

TEST(RunChains, ConcurrentMatchesSequential) {
  const auto b = bench::affine_benchmark();
  SamplerConfig cfg;
  cfg.n_steps = 400;
  cfg.burn_in = 100;
  cfg.seed = 40;
  const auto par = run_chains(b.map, b.lik, cfg, 6, 4);
  const auto seq = run_chains(b.map, b.lik, cfg, 6, 1);
  for (std::size_t c = 0; c < 6; ++c) {
    EXPECT_EQ(par[c].chain_index, c);
    EXPECT_EQ(par[c].config.seed, 40 + c);
    ASSERT_EQ(par[c].samples.size(), seq[c].samples.size());
    for (std::size_t k = 0; k < par[c].samples.size(); ++k) ASSERT_EQ(par[c].samples[k], seq[c].samples[k]);
  }
  EXPECT_NE(par[0].samples.back(), par[1].samples.back());
}

TEST(RunChain, DivergenceReportsStep) {
  // Stiff linear drift: the EM contraction factor is far outside (-1, 1).
  Matrix m(1, 1);
  m(0, 0) = 100.0;
  const auto map = GenerativeMap::affine(m, Vector::Zero(1));
  const LikelihoodModel lik(ForwardOperator::identity(1), Measurement{vec({0.0}), 0.01});
  SamplerConfig cfg;
  cfg.warm_steps = 0;
  cfg.tau = 0.5;
  cfg.n_steps = 1000;
  cfg.burn_in = 0;
  cfg.thinning = 1;
  try {
    run_chain(map, lik, cfg);
    FAIL() << "expected divergence";
  } catch (const ChainDivergence& e) {
    EXPECT_GT(e.step(), 0);
    EXPECT_LT(e.step(), 1000);
    EXPECT_TRUE(e.partial().diverged);
    EXPECT_EQ(e.partial().divergence_step, e.step());
    EXPECT_FALSE(e.partial().samples.empty());
  }
  const auto reports = run_chains(map, lik, cfg, 3, 2);
  for (const auto& r : reports) EXPECT_TRUE(r.diverged);
}

TEST(NfeCurve, Examples) {
  const std::array<std::int64_t, 3> ns{1, 10, 100};
  const auto c = nfe_curve(1, 800, ns);
  EXPECT_EQ(c[0], 801.0);
  EXPECT_EQ(c[1], 81.0);
  EXPECT_EQ(c[2], 9.0);
  const std::array<std::int64_t, 1> n25{25};
  EXPECT_DOUBLE_EQ(nfe_curve(1, 800, n25)[0], 33.0);
  const std::array<std::int64_t, 4> any{1, 7, 50, 1000};
  for (double v : nfe_curve(2, 0, any)) EXPECT_EQ(v, 2.0);
  const std::array<std::int64_t, 1> zero{0};
  EXPECT_THROW(nfe_curve(1, 800, zero), ContractViolation);
}

}  // namespace
}  // namespace nsl
