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

#include "nsl/experiment.hpp"

#include <chrono>
#include <cmath>

#include "nsl/io.hpp"
#include "nsl/metrics.hpp"
#include "nsl/rng.hpp"

namespace nsl {

namespace fs = std::filesystem;

namespace {

Json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  if (std::isinf(v) && v > 0) return "inf";
  return nullptr;
}

Json unavailable(const std::string& reason) { return Json{{"value", nullptr}, {"reason", reason}}; }

}  // namespace

bool ExperimentResult::all_diverged() const {
  if (reports.empty()) return false;
  for (const auto& r : reports) {
    if (!r.diverged) return false;
  }
  return true;
}

GenerativeMap build_map(const ExperimentConfig& cfg) { return map_from_json(cfg.map_spec, "map"); }

ForwardOperator build_operator(const ExperimentConfig& cfg) {
  return operator_from_json(cfg.operator_spec, "operator");
}

DataVector ground_truth_from_seed(const GenerativeMap& map, std::uint64_t seed) {
  const NormalStream s(seed, 0, StreamPurpose::ground_truth);
  return map.apply(s.normal(0, map.dim()));
}

Json compute_metrics(std::span<const DataVector> samples, const std::optional<DataVector>& reference,
                     const MetricToggles& toggles, std::uint64_t seed) {
  Json m = Json::object();
  m["n_samples"] = samples.size();
  if (toggles.psnr) {
    if (!reference) {
      m["psnr"] = unavailable("no reference");
    } else if (samples.empty()) {
      m["psnr"] = unavailable("no samples");
    } else {
      DataVector mean = DataVector::Zero(reference->size());
      double per_sample = 0.0;
      for (const auto& s : samples) {
        require(s.size() == reference->size(), "metrics: reference length does not match samples");
        mean += s;
        per_sample += psnr(s, *reference);
      }
      mean /= static_cast<double>(samples.size());
      m["psnr"] = Json{{"posterior_mean", number_or_null(psnr(mean, *reference))},
                       {"mean_per_sample", number_or_null(per_sample / static_cast<double>(samples.size()))}};
    }
  }
  if (toggles.diversity) {
    const int k = default_cluster_count(samples.size());
    if (k < 2 || samples.size() < static_cast<std::size_t>(k) + 1) {
      m["diversity"] = unavailable("too few samples");
    } else {
      try {
        SampleSet set{{samples.begin(), samples.end()}, std::nullopt};
        m["diversity"] = Json{{"value", diversity_score(set, k, seed)}, {"clusters", k}};
      } catch (const DegenerateSetError& e) {
        m["diversity"] = unavailable(e.what());
      }
    }
  }
  if (toggles.cosine) {
    if (samples.size() < 2) {
      m["cosine"] = unavailable("too few samples");
    } else {
      try {
        SampleSet set{{samples.begin(), samples.end()}, std::nullopt};
        m["cosine"] = Json{{"value", avg_pairwise_cosine(set)}};
      } catch (const ContractViolation& e) {
        m["cosine"] = unavailable(e.what());
      }
    }
  }
  return m;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads) {
  const auto t0 = std::chrono::steady_clock::now();
  const GenerativeMap map = build_map(cfg);
  ForwardOperator op = build_operator(cfg);

  ExperimentResult result;
  result.output_dir = cfg.output_dir;
  const auto& ms = cfg.measurement;
  if (ms.source == MeasurementSpec::Source::synthesize) {
    result.ground_truth = ms.ground_truth ? *ms.ground_truth : ground_truth_from_seed(map, ms.ground_truth_seed);
    result.measurement = synthesize_measurement(op, *result.ground_truth, ms.sigma, ms.noise_seed);
  } else {
    result.measurement = Measurement{ms.values, ms.sigma};
  }
  const LikelihoodModel lik(std::move(op), result.measurement);

  result.reports = run_chains(map, lik, cfg.sampler, cfg.chains, threads);

  const Json config_echo = cfg.to_json();
  atomic_write_file(cfg.output_dir / "config.json", config_echo.dump(2) + "\n");
  write_samples(result.reports, cfg.output_dir / "samples.csv", map.dim());
  for (const auto& r : result.reports) {
    const fs::path dir = cfg.output_dir / ("chain_" + std::to_string(r.chain_index));
    write_samples(r, dir / "samples.csv", map.dim());
    if (cfg.images && !r.samples.empty()) {
      DataVector mean = DataVector::Zero(map.dim());
      for (const auto& s : r.samples) mean += s;
      mean /= static_cast<double>(r.samples.size());
      write_pgm(mean, cfg.images->width, cfg.images->height, dir / "mean.pgm");
      write_pgm(r.samples.back(), cfg.images->width, cfg.images->height, dir / "last.pgm");
    }
  }
  if (cfg.images && result.ground_truth) {
    write_pgm(*result.ground_truth, cfg.images->width, cfg.images->height, cfg.output_dir / "truth.pgm");
  }

  std::vector<DataVector> pooled;
  Json chains = Json::array();
  std::int64_t nfe_total = 0;
  for (const auto& r : result.reports) {
    nfe_total += r.nfe_total;
    if (!r.diverged) pooled.insert(pooled.end(), r.samples.begin(), r.samples.end());
    chains.push_back(Json{{"chain", r.chain_index},
                          {"seed", r.config.seed},
                          {"diverged", r.diverged},
                          {"divergence_step", r.diverged ? Json(r.divergence_step) : Json(nullptr)},
                          {"error", r.diverged ? Json(r.error) : Json(nullptr)},
                          {"retained_samples", r.samples.size()},
                          {"nfe_total", r.nfe_total},
                          {"nfe_per_sample", number_or_null(r.nfe_per_sample)},
                          {"wall_time_seconds", r.wall_time_seconds}});
  }
  Json chain_seeds = Json::array();
  for (int c = 0; c < cfg.chains; ++c) chain_seeds.push_back(cfg.sampler.seed + static_cast<std::uint64_t>(c));
  Json seeds{{"sampler_base", cfg.sampler.seed}, {"chains", chain_seeds}};
  if (ms.source == MeasurementSpec::Source::synthesize) {
    seeds["noise"] = ms.noise_seed;
    if (!ms.ground_truth) seeds["ground_truth"] = ms.ground_truth_seed;
  }

  const std::size_t retained = pooled.size();
  Json& s = result.summary;
  s["config"] = config_echo;
  s["seeds"] = seeds;
  s["eta"] = map.nfe_per_eval();
  s["nfe_total"] = nfe_total;
  s["nfe_per_sample"] = retained == 0 ? Json(nullptr) : Json(static_cast<double>(nfe_total) / static_cast<double>(retained));
  s["metrics"] = compute_metrics(pooled, result.ground_truth, cfg.metrics, cfg.sampler.seed);
  s["chains"] = chains;
  s["all_diverged"] = result.all_diverged();
  s["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  atomic_write_file(cfg.output_dir / "summary.json", s.dump(2) + "\n");
  return result;
}

}  // namespace nsl
