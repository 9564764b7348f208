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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <string>
#include <thread>

namespace nsl {

namespace {

void evaluate_into(LangevinState& s, const LikelihoodModel& lik,
                   const GenerativeMap& map, Refresh refresh) {
  if (refresh == Refresh::forward_only) {
    s.x0 = map.apply(s.z);
    s.has_gradient = false;
    if (!s.x0.allFinite()) {
      throw DivergenceError("non-finite Phi(z) at step " + std::to_string(s.step),
                            s.step);
    }
    return;
  }
  auto eval = evaluate_noise_loss(lik, map, s.z);
  ++s.gradient_evals;
  if (!std::isfinite(eval.loss) || !eval.grad.allFinite()) {
    throw DivergenceError(
        "non-finite loss or gradient at step " + std::to_string(s.step), s.step);
  }
  s.x0 = std::move(eval.x0);
  s.g = std::move(eval.grad);
  s.loss = eval.loss;
  s.has_gradient = true;
}

template <class Update>
LangevinState advance(const LangevinState& state, const LikelihoodModel& lik,
                      const GenerativeMap& map, double tau, Refresh refresh,
                      Update update) {
  require(state.has_gradient, "langevin step: state has no cached gradient");
  require(state.z.size() == map.dim(), "langevin step: state dimension mismatch");
  const NoiseVector xi = state.rng.normal(static_cast<std::uint64_t>(state.step),
                                          state.z.size());
  LangevinState next;
  next.rng = state.rng;
  next.step = state.step + 1;
  next.gradient_evals = state.gradient_evals;
  next.z = update(state.z, state.g, tau, xi);
  if (!next.z.allFinite()) {
    throw DivergenceError("non-finite iterate at step " + std::to_string(next.step),
                          next.step);
  }
  evaluate_into(next, lik, map, refresh);
  return next;
}

}  // namespace

std::string_view to_string(Scheme scheme) {
  return scheme == Scheme::em ? "em" : "ei";
}

void SamplerConfig::validate() const {
  require(std::isfinite(tau) && tau > 0.0 && tau < 1.0, "sampler.tau must lie in (0, 1)");
  require(n_steps >= 1, "sampler.n_steps must be >= 1");
  require(warm_steps >= 0, "sampler.warm_steps must be >= 0");
  require(adam_lr > 0.0, "sampler.adam_lr must be positive");
  require(adam_beta1 > 0.0 && adam_beta1 < 1.0, "sampler.adam_beta1 must lie in (0, 1)");
  require(adam_beta2 > 0.0 && adam_beta2 < 1.0, "sampler.adam_beta2 must lie in (0, 1)");
  require(adam_eps > 0.0, "sampler.adam_eps must be positive");
  require(burn_in >= 0 && burn_in < n_steps,
          "sampler.burn_in must satisfy 0 <= burn_in < n_steps");
  require(thinning >= 1, "sampler.thinning must be >= 1");
  require(thinning <= n_steps - burn_in,
          "sampler.thinning exceeds n_steps - burn_in; no sample would be retained");
}

bool SamplerConfig::retains(std::int64_t step) const {
  return step > burn_in && step <= n_steps && (step - burn_in) % thinning == 0;
}

std::int64_t SamplerConfig::retained_count() const {
  return (n_steps - burn_in) / thinning;
}

LangevinState start_chain(const NoiseVector& z0, const LikelihoodModel& lik,
                          const GenerativeMap& map, const NormalStream& rng) {
  require(z0.size() == map.dim(), "start_chain: z0 dimension mismatch");
  require(z0.allFinite(), "start_chain: z0 must be finite");
  LangevinState s;
  s.z = z0;
  s.rng = rng;
  evaluate_into(s, lik, map, Refresh::gradient);
  return s;
}

NoiseVector em_update(const NoiseVector& z, const NoiseVector& g, double tau,
                      const NoiseVector& xi) {
  return (1.0 - tau) * z - tau * g + std::sqrt(2.0 * tau) * xi;
}

NoiseVector ei_update(const NoiseVector& z, const NoiseVector& g, double tau,
                      const NoiseVector& xi) {
  const double decay = std::exp(-tau);
  return decay * z - (-std::expm1(-tau)) * g +
         std::sqrt(-std::expm1(-2.0 * tau)) * xi;
}

LangevinState em_step(const LangevinState& state, const LikelihoodModel& lik,
                      const GenerativeMap& map, double tau, Refresh refresh) {
  require(tau > 0.0 && tau < 1.0, "em_step: tau must lie in (0, 1)");
  return advance(state, lik, map, tau, refresh, em_update);
}

LangevinState ei_step(const LangevinState& state, const LikelihoodModel& lik,
                      const GenerativeMap& map, double tau, Refresh refresh) {
  require(tau > 0.0 && std::isfinite(tau), "ei_step: tau must be positive");
  return advance(state, lik, map, tau, refresh, ei_update);
}

WarmStartResult adam_warm_start(const NoiseVector& z0, const LikelihoodModel& lik,
                                const GenerativeMap& map, const SamplerConfig& cfg) {
  require(cfg.warm_steps >= 0, "adam_warm_start: warm_steps must be >= 0");
  WarmStartResult out;
  out.z = z0;
  Vector m = Vector::Zero(z0.size());
  Vector v = Vector::Zero(z0.size());
  double b1_pow = 1.0;
  double b2_pow = 1.0;
  for (std::int64_t t = 1; t <= cfg.warm_steps; ++t) {
    const auto eval = evaluate_noise_loss(lik, map, out.z);
    ++out.gradient_evals;
    if (!std::isfinite(eval.loss) || !eval.grad.allFinite()) {
      throw DivergenceError("adam warm start: non-finite loss at iteration " +
                                std::to_string(t),
                            -t);
    }
    out.loss_trace.push_back(eval.loss);
    b1_pow *= cfg.adam_beta1;
    b2_pow *= cfg.adam_beta2;
    m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * eval.grad;
    v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * eval.grad.cwiseAbs2();
    const Vector m_hat = m / (1.0 - b1_pow);
    const Vector v_hat = v / (1.0 - b2_pow);
    out.z -= cfg.adam_lr *
             m_hat.cwiseQuotient((v_hat.cwiseSqrt().array() + cfg.adam_eps).matrix());
  }
  return out;
}

RunReport run_chain(const GenerativeMap& map, const LikelihoodModel& lik,
                    const SamplerConfig& cfg, const ChainOptions& options) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::int64_t eta = map.nfe_per_eval();
  RunReport report;
  report.config = cfg;
  report.chain_index = options.chain_index;
  if (options.record_noise) report.noise_trace.emplace();

  std::int64_t gradient_evals = 0;
  auto finish = [&] {
    report.nfe_total = eta * gradient_evals;
    report.nfe_per_sample =
        report.samples.empty()
            ? 0.0
            : static_cast<double>(report.nfe_total) / static_cast<double>(report.samples.size());
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  try {
    const NoiseVector z_init =
        NormalStream(cfg.seed, options.chain_index, StreamPurpose::chain_init)
            .normal(0, map.dim());
    const auto warm = adam_warm_start(z_init, lik, map, cfg);
    gradient_evals += warm.gradient_evals;

    LangevinState state = start_chain(
        warm.z, lik, map,
        NormalStream(cfg.seed, options.chain_index, StreamPurpose::langevin));
    gradient_evals += state.gradient_evals;
    state.gradient_evals = 0;

    for (std::int64_t i = 1; i <= cfg.n_steps; ++i) {
      const Refresh refresh = i == cfg.n_steps ? Refresh::forward_only : Refresh::gradient;
      state = cfg.scheme == Scheme::em ? em_step(state, lik, map, cfg.tau, refresh)
                                       : ei_step(state, lik, map, cfg.tau, refresh);
      if (cfg.retains(i)) {
        report.samples.push_back(state.x0);
        report.sample_steps.push_back(i);
        if (report.noise_trace) report.noise_trace->push_back(state.z);
      }
    }
    gradient_evals += state.gradient_evals;
  } catch (const DivergenceError& e) {
    report.diverged = true;
    report.divergence_step = e.step();
    report.error = e.what();
    finish();
    throw ChainDivergence(e, std::move(report));
  }
  finish();
  if (gradient_evals != cfg.warm_steps + cfg.n_steps) {
    throw std::logic_error("run_chain: gradient evaluation count " +
                           std::to_string(gradient_evals) + " != K + N");
  }
  return report;
}

std::vector<RunReport> run_chains(const GenerativeMap& map,
                                  const LikelihoodModel& lik,
                                  const SamplerConfig& cfg, int n_chains,
                                  unsigned threads, bool record_noise) {
  require(n_chains >= 1, "run_chains: n_chains must be >= 1");
  cfg.validate();
  std::vector<RunReport> reports(static_cast<std::size_t>(n_chains));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int c = next++; c < n_chains; c = next++) {
      SamplerConfig chain_cfg = cfg;
      chain_cfg.seed = cfg.seed + static_cast<std::uint64_t>(c);
      ChainOptions opts{static_cast<std::uint32_t>(c), record_noise};
      try {
        reports[static_cast<std::size_t>(c)] = run_chain(map, lik, chain_cfg, opts);
      } catch (const ChainDivergence& e) {
        reports[static_cast<std::size_t>(c)] = e.partial();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n_chains));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return reports;
}

std::vector<double> nfe_curve(int eta, std::int64_t warm_steps,
                              std::span<const std::int64_t> n_values) {
  require(eta >= 1, "nfe_curve: eta must be >= 1");
  require(warm_steps >= 0, "nfe_curve: warm_steps must be >= 0");
  std::vector<double> out;
  out.reserve(n_values.size());
  for (const auto n : n_values) {
    require(n > 0, "nfe_curve: every N must be positive");
    out.push_back(static_cast<double>(eta) * static_cast<double>(warm_steps + n) /
                  static_cast<double>(n));
  }
  return out;
}

}  // namespace nsl
