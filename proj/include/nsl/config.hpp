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

#ifndef NSL_CONFIG_HPP_
#define NSL_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "nsl/forward_ops.hpp"
#include "nsl/noise_core.hpp"
#include "nsl/samplers.hpp"

namespace nsl {

using Json = nlohmann::json;

// Parse or validation failure; `key` is the dotted path of the offending
// entry when one applies.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string key = {})
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Map and operator JSON forms. Matrices are flat row-major arrays.
//
//   {"kind": "affine", "dim": d, "matrix": [...], "offset": [...]}
//   {"kind": "mlp", "dim": d, "layers": [{"weights": [...], "bias": [...]}]}
//   {"kind": "mlp", "dim": d, "hidden": [h, ...], "seed": s, "gain": g}
//   {"kind": "two_step", "inner": {...}, "seed": s, "mix": m}
GenerativeMap map_from_json(const Json& j, const std::string& path = "map");
Json map_to_json(const GenerativeMap& map);

//   {"kind": "inpaint", "mask": [0/1...]} | {"kind": "inpaint", "dim": d,
//       "keep_fraction": p, "seed": s} | {"kind": "inpaint", "dim": d}
//   {"kind": "avgpool", "dim": d, "factor": f}
//   {"kind": "conv_blur", "dim": d, "kernel": [...]} | {..., "gaussian":
//       {"size": k, "std": s}}
//   {"kind": "hdr_clip", "dim": d, "scale": 2}
//   {"kind": "dft_magnitude", "shape": [n] | [s, s], "pad": p}
//   {"kind": "toy_nonlinear", "dim": d, "hidden": h, "seed": s}
ForwardOperator operator_from_json(const Json& j, const std::string& path = "operator");
Json operator_to_json(const ForwardOperator& op);

Json sampler_to_json(const SamplerConfig& cfg);
SamplerConfig sampler_from_json(const Json& j, const std::string& path = "sampler");

struct MeasurementSpec {
  enum class Source { synthesize, file, values };
  Source source = Source::synthesize;
  double sigma = 0.1;
  std::uint64_t noise_seed = 0;
  std::optional<Vector> ground_truth;
  std::uint64_t ground_truth_seed = 0;  // x0 = Phi(z), z ~ N(0, I)
  std::filesystem::path path;
  Vector values;
};

struct MetricToggles {
  bool psnr = true;
  bool diversity = true;
  bool cosine = true;
};

struct ImageOptions {
  Index width = 0;
  Index height = 0;
};

struct ExperimentConfig {
  Json map_spec;
  Json operator_spec;
  MeasurementSpec measurement;
  SamplerConfig sampler;
  int chains = 1;
  std::filesystem::path output_dir;
  MetricToggles metrics;
  std::optional<ImageOptions> images;

  // Canonical JSON with defaults filled in.
  Json to_json() const;
};

// Strict schema: unknown keys are rejected with a nearest-key suggestion.
ExperimentConfig config_from_json(const Json& j,
                                  const std::filesystem::path& base_dir = {});
ExperimentConfig parse_config(const std::filesystem::path& path);

// Output root used when a config omits output_dir: $NSL_OUTPUT_ROOT or
// ./runs.
std::filesystem::path default_output_root();

}  // namespace nsl

#endif  // NSL_CONFIG_HPP_
