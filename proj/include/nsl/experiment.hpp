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

#ifndef NSL_EXPERIMENT_HPP_
#define NSL_EXPERIMENT_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "nsl/config.hpp"
#include "nsl/samplers.hpp"

namespace nsl {

struct ExperimentResult {
  std::vector<RunReport> reports;
  Measurement measurement;
  std::optional<DataVector> ground_truth;
  Json summary;
  std::filesystem::path output_dir;

  bool all_diverged() const;
};

// Builds the map, operator and measurement a config describes.
GenerativeMap build_map(const ExperimentConfig& cfg);
ForwardOperator build_operator(const ExperimentConfig& cfg);
// x0 = Phi(z) with z drawn from the ground-truth stream of `seed`.
DataVector ground_truth_from_seed(const GenerativeMap& map, std::uint64_t seed);

// Enabled metrics over a pooled sample set. Metrics that do not apply (no
// reference, too few samples, degenerate set) are null with a reason.
Json compute_metrics(std::span<const DataVector> samples,
                     const std::optional<DataVector>& reference,
                     const MetricToggles& toggles, std::uint64_t seed = 0);

// Output layout under cfg.output_dir:
//   config.json              canonical config echo
//   samples.csv              all chains
//   chain_<c>/samples.csv    one per chain
//   chain_<c>/mean.pgm, last.pgm, truth.pgm   when images are configured
//   summary.json             written last
// Every file is written atomically.
ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads = 0);

}  // namespace nsl

#endif  // NSL_EXPERIMENT_HPP_
