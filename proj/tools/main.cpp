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

// nslangevin: noise-space Langevin posterior sampling.
//
// Exit codes: 0 success, 1 check failure, 2 usage or config error, 3 every
// chain diverged.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nsl/config.hpp"
#include "nsl/experiment.hpp"
#include "nsl/io.hpp"
#include "nsl/samplers.hpp"
#include "nsl/verify.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;
constexpr int kAllDiverged = 3;

int cmd_sample(const std::string& config_path, const std::string& output_dir, unsigned threads) {
  nsl::ExperimentConfig cfg = nsl::parse_config(config_path);
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  const auto result = nsl::run_experiment(cfg, threads);
  int diverged = 0;
  for (const auto& r : result.reports) {
    if (r.diverged) {
      ++diverged;
      std::cerr << "chain " << r.chain_index << " diverged at step " << r.divergence_step << ": " << r.error
                << "\n";
    }
  }
  std::cout << "wrote " << result.output_dir.string() << " (" << result.reports.size() << " chains, "
            << diverged << " diverged, nfe_total " << result.summary["nfe_total"] << ")\n";
  return result.all_diverged() ? kAllDiverged : kOk;
}

int cmd_verify(const std::string& suite) {
  const auto& names = nsl::verify_suite_names();
  if (suite != "all" && std::find(names.begin(), names.end(), suite) == names.end()) {
    std::cerr << "unknown suite \"" << suite << "\"; expected one of:";
    for (const auto& n : names) std::cerr << " " << n;
    std::cerr << " all\n";
    return kUsage;
  }
  bool ok = true;
  for (const auto& r : nsl::run_verify_suite(suite)) {
    std::cout << nsl::format_check(r) << "\n";
    ok = ok && r.passed;
  }
  return ok ? kOk : kCheckFailed;
}

int cmd_metrics(const std::string& samples_path, const std::string& reference_path) {
  const auto rows = nsl::read_samples(samples_path);
  std::vector<nsl::DataVector> samples;
  samples.reserve(rows.size());
  for (const auto& r : rows) samples.push_back(r.values);
  std::optional<nsl::DataVector> reference;
  if (!reference_path.empty()) {
    reference = nsl::read_vector_file(reference_path);
    if (!samples.empty() && reference->size() != samples.front().size()) {
      std::cerr << "reference length " << reference->size() << " does not match sample width "
                << samples.front().size() << "\n";
      return kUsage;
    }
  }
  std::cout << nsl::compute_metrics(samples, reference, nsl::MetricToggles{}).dump(2) << "\n";
  return kOk;
}

int cmd_nfe(int eta, std::int64_t warm, const std::vector<std::int64_t>& steps) {
  const auto curve = nsl::nfe_curve(eta, warm, steps);
  std::cout << "N,nfe_total,nfe_per_sample\n";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    std::cout << steps[i] << "," << static_cast<std::int64_t>(eta) * (warm + steps[i]) << ","
              << nsl::format_double(curve[i]) << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise-space Langevin posterior sampling"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  unsigned threads = 0;
  auto* sample = app.add_subcommand("sample", "Run the chains described by a JSON config");
  sample->add_option("config", config_path, "Config file")->required();
  sample->add_option("-o,--output-dir", output_dir, "Override the config's output_dir");
  sample->add_option("-j,--threads", threads, "Worker threads (0 = hardware concurrency)");

  std::string suite;
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("suite", suite, "pullback, adjoint, drift, equilibrium, theorem, dpi, nfe or all")
      ->required();

  std::string samples_path;
  std::string reference_path;
  auto* metrics = app.add_subcommand("metrics", "Sample-set metrics of a samples.csv");
  metrics->add_option("samples", samples_path, "samples.csv")->required()->check(CLI::ExistingFile);
  metrics->add_option("--reference", reference_path, "Reference vector file")->check(CLI::ExistingFile);

  int eta = 1;
  std::int64_t warm = 0;
  std::vector<std::int64_t> steps;
  auto* nfe = app.add_subcommand("nfe", "NFE per retained sample for a range of chain lengths");
  nfe->add_option("--eta", eta, "Network evaluations per map call")->required()->check(CLI::PositiveNumber);
  nfe->add_option("--warm", warm, "Warm-start steps K")->required()->check(CLI::NonNegativeNumber);
  nfe->add_option("--steps", steps, "Langevin steps N")->required()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*sample) return cmd_sample(config_path, output_dir, threads);
    if (*verify) return cmd_verify(suite);
    if (*metrics) return cmd_metrics(samples_path, reference_path);
    if (*nfe) return cmd_nfe(eta, warm, steps);
  } catch (const nsl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const nsl::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kUsage;
  } catch (const nsl::ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailed;
  }
  return kUsage;
}
