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

#ifndef NSL_SAMPLERS_HPP_
#define NSL_SAMPLERS_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nsl/forward_ops.hpp"
#include "nsl/noise_core.hpp"
#include "nsl/rng.hpp"

namespace nsl {

enum class Scheme { em, ei };

std::string_view to_string(Scheme scheme);

struct SamplerConfig {
  double tau = 1e-3;
  std::int64_t n_steps = 2000;
  std::int64_t warm_steps = 500;
  double adam_lr = 5e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  Scheme scheme = Scheme::em;
  std::uint64_t seed = 0;
  std::int64_t burn_in = 500;
  std::int64_t thinning = 10;

  // Throws ContractViolation naming the offending field.
  void validate() const;
  // Steps i in [1, n_steps] whose sample Phi(z^i) is retained.
  bool retains(std::int64_t step) const;
  std::int64_t retained_count() const;
};

// Chain state z^i with the cached drift term g^i = grad L_y(Phi(z^i)).
struct LangevinState {
  NoiseVector z;
  NoiseVector g;         // valid when has_gradient
  DataVector x0;         // Phi(z)
  double loss = 0.0;     // L_y(Phi(z)), valid when has_gradient
  bool has_gradient = false;
  std::int64_t step = 0;
  NormalStream rng;
  std::int64_t gradient_evals = 0;
};

// Evaluates g^0 at z0 (one gradient evaluation).
LangevinState start_chain(const NoiseVector& z0, const LikelihoodModel& lik,
                          const GenerativeMap& map, const NormalStream& rng);

// z' = (1 - tau) z - tau g + sqrt(2 tau) xi.
NoiseVector em_update(const NoiseVector& z, const NoiseVector& g, double tau,
                      const NoiseVector& xi);
// z' = e^-tau z - (1 - e^-tau) g + sqrt(1 - e^-2tau) xi.
NoiseVector ei_update(const NoiseVector& z, const NoiseVector& g, double tau,
                      const NoiseVector& xi);

// What a step evaluates at its new iterate. `forward_only` computes Phi(z')
// without a gradient; it ends a chain.
enum class Refresh { gradient, forward_only };

// One step with xi^i drawn from state.rng at counter state.step. Consumes one
// gradient evaluation (eta NFEs) unless refresh == forward_only. Throws
// DivergenceError on a non-finite iterate, loss, or gradient.
LangevinState em_step(const LangevinState& state, const LikelihoodModel& lik,
                      const GenerativeMap& map, double tau,
                      Refresh refresh = Refresh::gradient);
LangevinState ei_step(const LangevinState& state, const LikelihoodModel& lik,
                      const GenerativeMap& map, double tau,
                      Refresh refresh = Refresh::gradient);

struct WarmStartResult {
  NoiseVector z;
  std::vector<double> loss_trace;  // loss at each evaluated iterate
  std::int64_t gradient_evals = 0;
};

// cfg.warm_steps bias-corrected Adam steps on L_y(Phi(.)) from z0.
WarmStartResult adam_warm_start(const NoiseVector& z0, const LikelihoodModel& lik,
                                const GenerativeMap& map, const SamplerConfig& cfg);

struct RunReport {
  std::vector<DataVector> samples;
  std::vector<std::int64_t> sample_steps;
  std::optional<std::vector<NoiseVector>> noise_trace;
  std::int64_t nfe_total = 0;
  double nfe_per_sample = 0.0;
  SamplerConfig config;
  std::uint32_t chain_index = 0;
  double wall_time_seconds = 0.0;
  bool diverged = false;
  std::int64_t divergence_step = -1;
  std::string error;
};

// Thrown by run_chain; carries the report accumulated before divergence.
class ChainDivergence : public DivergenceError {
 public:
  ChainDivergence(const DivergenceError& cause, RunReport partial)
      : DivergenceError(cause.what(), cause.step()),
        partial_(std::make_shared<RunReport>(std::move(partial))) {}
  const RunReport& partial() const { return *partial_; }

 private:
  std::shared_ptr<const RunReport> partial_;
};

struct ChainOptions {
  std::uint32_t chain_index = 0;
  bool record_noise = false;
};

// Warm start from z_init ~ N(0, I), then n_steps Langevin steps; retains
// Phi(z^i) per cfg.retains(i). Exactly warm_steps + n_steps gradient
// evaluations; the last step only evaluates Phi. nfe_total = eta (K + N).
RunReport run_chain(const GenerativeMap& map, const LikelihoodModel& lik,
                    const SamplerConfig& cfg, const ChainOptions& options = {});

// Independent chains with cfg.seed + c and chain index c, c in [0, n_chains).
// Runs on up to `threads` workers (0 = hardware concurrency). Divergent chains
// are reported with diverged = true instead of throwing.
std::vector<RunReport> run_chains(const GenerativeMap& map,
                                  const LikelihoodModel& lik,
                                  const SamplerConfig& cfg, int n_chains,
                                  unsigned threads = 0, bool record_noise = false);

// Amortized NFE per sample eta (K + N) / N for each N.
std::vector<double> nfe_curve(int eta, std::int64_t warm_steps,
                              std::span<const std::int64_t> n_values);

}  // namespace nsl

#endif  // NSL_SAMPLERS_HPP_
