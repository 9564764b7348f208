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

#include "nsl/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "nsl/io.hpp"

namespace nsl {

namespace fs = std::filesystem;

namespace {

using KeyList = std::vector<std::string>;

const KeyList kTopKeys = {"map", "operator", "measurement", "sampler", "chains",
                          "output_dir", "metrics", "images"};
const KeyList kSamplerKeys = {"tau", "n_steps", "warm_steps", "adam_lr",
                              "adam_beta1", "adam_beta2", "adam_eps", "scheme",
                              "seed", "burn_in", "thinning"};
const KeyList kMeasurementKeys = {"source", "sigma", "noise_seed", "ground_truth",
                                  "ground_truth_seed", "path", "values"};
const KeyList kMetricKeys = {"psnr", "diversity", "cosine"};
const KeyList kImageKeys = {"width", "height"};

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Every known key in the schema as a dotted path, for cross-section hints.
std::vector<std::string> all_known_paths() {
  std::vector<std::string> out(kTopKeys.begin(), kTopKeys.end());
  for (const auto& k : kSamplerKeys) out.push_back("sampler." + k);
  for (const auto& k : kMeasurementKeys) out.push_back("measurement." + k);
  for (const auto& k : kMetricKeys) out.push_back("metrics." + k);
  for (const auto& k : kImageKeys) out.push_back("images." + k);
  return out;
}

void reject_unknown(const Json& j, const std::string& path, const KeyList& allowed) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
    std::string best;
    std::size_t best_d = std::numeric_limits<std::size_t>::max();
    for (const auto& cand : allowed) {
      const std::size_t d = edit_distance(key, cand);
      if (d < best_d) {
        best_d = d;
        best = join(path, cand);
      }
    }
    // A typo in the wrong section still gets a hint.
    for (const auto& cand : all_known_paths()) {
      const auto leaf = cand.substr(cand.rfind('.') == std::string::npos ? 0 : cand.rfind('.') + 1);
      const std::size_t d = edit_distance(key, leaf);
      if (d < best_d) {
        best_d = d;
        best = cand;
      }
    }
    std::string msg = "unknown key \"" + join(path, key) + "\"";
    if (best_d <= std::max<std::size_t>(2, key.size() / 3)) msg += "; did you mean \"" + best + "\"?";
    throw ConfigError(msg, join(path, key));
  }
}

const Json& need(const Json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("missing required key \"" + join(path, key) + "\"", join(path, key));
  return j.at(key);
}

void need_object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError("\"" + path + "\" must be an object", path);
}

double get_number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError("\"" + path + "\" must be a number", path);
  return j.get<double>();
}

std::int64_t get_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError("\"" + path + "\" must be an integer", path);
  return j.get<std::int64_t>();
}

std::uint64_t get_seed(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
    throw ConfigError("\"" + path + "\" must be a nonnegative integer", path);
  }
  return j.get<std::uint64_t>();
}

bool get_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError("\"" + path + "\" must be true or false", path);
  return j.get<bool>();
}

std::string get_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError("\"" + path + "\" must be a string", path);
  return j.get<std::string>();
}

Vector get_vector(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError("\"" + path + "\" must be an array of numbers", path);
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Index>(i)] = get_number(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

Matrix get_matrix(const Json& j, Index rows, Index cols, const std::string& path) {
  const Vector flat = get_vector(j, path);
  if (flat.size() != rows * cols) {
    throw ConfigError("\"" + path + "\" has " + std::to_string(flat.size()) + " entries, expected " +
                          std::to_string(rows * cols) + " (" + std::to_string(rows) + " x " +
                          std::to_string(cols) + ", row-major)",
                      path);
  }
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = flat[r * cols + c];
  }
  return m;
}

Json flat(const Matrix& m) {
  Json a = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  }
  return a;
}

Json flat(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Index get_dim(const Json& j, const std::string& path) {
  const auto d = get_int(j, path);
  if (d < 1) throw ConfigError("\"" + path + "\" must be positive", path);
  return static_cast<Index>(d);
}

// Wraps library contract violations with the config path they came from.
template <typename F>
auto wrap(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ContractViolation& e) {
    throw ConfigError("\"" + path + "\": " + e.what(), path);
  }
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

GenerativeMap map_from_json(const Json& j, const std::string& path) {
  need_object(j, path);
  const auto kind = get_string(need(j, path, "kind"), join(path, "kind"));
  if (kind == "affine") {
    reject_unknown(j, path, {"kind", "dim", "matrix", "offset", "identity"});
    const Index d = get_dim(need(j, path, "dim"), join(path, "dim"));
    if (j.contains("identity") && get_bool(j.at("identity"), join(path, "identity"))) {
      if (j.contains("matrix") || j.contains("offset")) {
        throw ConfigError("\"" + path + "\": identity excludes matrix and offset", join(path, "identity"));
      }
      return GenerativeMap::identity(d);
    }
    Matrix m = get_matrix(need(j, path, "matrix"), d, d, join(path, "matrix"));
    Vector b = j.contains("offset") ? get_vector(j.at("offset"), join(path, "offset")) : Vector::Zero(d);
    if (b.size() != d) {
      throw ConfigError("\"" + join(path, "offset") + "\" length " + std::to_string(b.size()) +
                            " does not match \"" + join(path, "dim") + "\" = " + std::to_string(d),
                        join(path, "offset"));
    }
    return wrap(path, [&] { return GenerativeMap::affine(std::move(m), std::move(b)); });
  }
  if (kind == "mlp") {
    reject_unknown(j, path, {"kind", "dim", "layers", "hidden", "seed", "gain"});
    const Index d = get_dim(need(j, path, "dim"), join(path, "dim"));
    if (j.contains("layers")) {
      if (j.contains("hidden") || j.contains("seed") || j.contains("gain")) {
        throw ConfigError("\"" + path + "\": give either layers or hidden/seed/gain", join(path, "layers"));
      }
      const auto& lj = j.at("layers");
      if (!lj.is_array() || lj.empty()) {
        throw ConfigError("\"" + join(path, "layers") + "\" must be a nonempty array", join(path, "layers"));
      }
      std::vector<DenseLayer> layers;
      Index fan_in = d;
      for (std::size_t l = 0; l < lj.size(); ++l) {
        const std::string lp = join(path, "layers") + "[" + std::to_string(l) + "]";
        need_object(lj[l], lp);
        reject_unknown(lj[l], lp, {"weights", "bias"});
        Vector bias = get_vector(need(lj[l], lp, "bias"), join(lp, "bias"));
        Matrix w = get_matrix(need(lj[l], lp, "weights"), bias.size(), fan_in, join(lp, "weights"));
        fan_in = bias.size();
        layers.push_back({std::move(w), std::move(bias)});
      }
      return wrap(path, [&] { return GenerativeMap::mlp(std::move(layers)); });
    }
    std::vector<Index> hidden;
    if (j.contains("hidden")) {
      const Vector h = get_vector(j.at("hidden"), join(path, "hidden"));
      for (Index i = 0; i < h.size(); ++i) {
        if (h[i] < 1 || h[i] != std::floor(h[i])) {
          throw ConfigError("\"" + join(path, "hidden") + "\" entries must be positive integers", join(path, "hidden"));
        }
        hidden.push_back(static_cast<Index>(h[i]));
      }
    }
    const std::uint64_t seed = j.contains("seed") ? get_seed(j.at("seed"), join(path, "seed")) : 0;
    const double gain = j.contains("gain") ? get_number(j.at("gain"), join(path, "gain")) : 1.0;
    return wrap(path, [&] { return GenerativeMap::random_mlp(d, hidden, seed, gain); });
  }
  if (kind == "two_step") {
    reject_unknown(j, path, {"kind", "inner", "seed", "mix"});
    const GenerativeMap inner = map_from_json(need(j, path, "inner"), join(path, "inner"));
    const std::uint64_t seed = j.contains("seed") ? get_seed(j.at("seed"), join(path, "seed")) : 0;
    const double mix = j.contains("mix") ? get_number(j.at("mix"), join(path, "mix")) : 0.5;
    return wrap(path, [&] { return make_two_step_map(inner, seed, mix); });
  }
  throw ConfigError("\"" + join(path, "kind") + "\" must be one of affine, mlp, two_step (got \"" + kind + "\")",
                    join(path, "kind"));
}

Json map_to_json(const GenerativeMap& map) {
  Json j;
  j["kind"] = std::string(to_string(map.kind()));
  if (const auto* a = map.as_affine()) {
    j["dim"] = map.dim();
    j["matrix"] = flat(a->matrix);
    j["offset"] = flat(a->offset);
  } else if (const auto* m = map.as_mlp()) {
    j["dim"] = map.dim();
    Json layers = Json::array();
    for (const auto& l : m->layers) layers.push_back({{"weights", flat(l.weights)}, {"bias", flat(l.bias)}});
    j["layers"] = layers;
  } else if (const auto* t = map.as_two_step()) {
    j["inner"] = map_to_json(*t->inner);
    j["seed"] = t->seed;
    j["mix"] = t->mix;
  }
  return j;
}

ForwardOperator operator_from_json(const Json& j, const std::string& path) {
  need_object(j, path);
  const auto kind = get_string(need(j, path, "kind"), join(path, "kind"));
  if (kind == "inpaint") {
    reject_unknown(j, path, {"kind", "dim", "mask", "keep_fraction", "seed"});
    if (j.contains("mask")) {
      if (j.contains("keep_fraction") || j.contains("seed")) {
        throw ConfigError("\"" + path + "\": give either mask or keep_fraction/seed", join(path, "mask"));
      }
      const auto& mj = j.at("mask");
      if (!mj.is_array()) throw ConfigError("\"" + join(path, "mask") + "\" must be an array of 0/1", join(path, "mask"));
      std::vector<std::uint8_t> mask;
      for (std::size_t i = 0; i < mj.size(); ++i) {
        if (!mj[i].is_number_integer() || (mj[i] != 0 && mj[i] != 1)) {
          throw ConfigError("\"" + join(path, "mask") + "\" entries must be 0 or 1", join(path, "mask"));
        }
        mask.push_back(static_cast<std::uint8_t>(mj[i].get<int>()));
      }
      if (j.contains("dim") && get_dim(j.at("dim"), join(path, "dim")) != static_cast<Index>(mask.size())) {
        throw ConfigError("\"" + join(path, "mask") + "\" length " + std::to_string(mask.size()) +
                              " does not match \"" + join(path, "dim") + "\"",
                          join(path, "mask"));
      }
      return wrap(path, [&] { return ForwardOperator::inpaint(std::move(mask)); });
    }
    const Index d = get_dim(need(j, path, "dim"), join(path, "dim"));
    if (j.contains("keep_fraction")) {
      const double p = get_number(j.at("keep_fraction"), join(path, "keep_fraction"));
      const std::uint64_t seed = j.contains("seed") ? get_seed(j.at("seed"), join(path, "seed")) : 0;
      return wrap(path, [&] { return ForwardOperator::random_inpaint(d, p, seed); });
    }
    return ForwardOperator::identity(d);
  }
  if (kind == "avgpool") {
    reject_unknown(j, path, {"kind", "dim", "factor"});
    const Index d = get_dim(need(j, path, "dim"), join(path, "dim"));
    const Index f = get_dim(need(j, path, "factor"), join(path, "factor"));
    return wrap(path, [&] { return ForwardOperator::avgpool(d, f); });
  }
  if (kind == "conv_blur") {
    reject_unknown(j, path, {"kind", "dim", "kernel", "gaussian"});
    const Index d = get_dim(need(j, path, "dim"), join(path, "dim"));
    Vector kernel;
    if (j.contains("kernel") == j.contains("gaussian")) {
      throw ConfigError("\"" + path + "\": give exactly one of kernel or gaussian", join(path, "kernel"));
    }
    if (j.contains("kernel")) {
      kernel = get_vector(j.at("kernel"), join(path, "kernel"));
    } else {
      const std::string gp = join(path, "gaussian");
      const auto& g = j.at("gaussian");
      need_object(g, gp);
      reject_unknown(g, gp, {"size", "std"});
      const Index size = get_dim(need(g, gp, "size"), join(gp, "size"));
      const double sd = get_number(need(g, gp, "std"), join(gp, "std"));
      kernel = wrap(gp, [&] { return ForwardOperator::gaussian_kernel(size, sd); });
    }
    return wrap(path, [&] { return ForwardOperator::conv_blur(d, std::move(kernel)); });
  }
  if (kind == "hdr_clip") {
    reject_unknown(j, path, {"kind", "dim", "scale"});
    const Index d = get_dim(need(j, path, "dim"), join(path, "dim"));
    const double s = j.contains("scale") ? get_number(j.at("scale"), join(path, "scale")) : 2.0;
    return wrap(path, [&] { return ForwardOperator::hdr_clip(d, s); });
  }
  if (kind == "dft_magnitude") {
    reject_unknown(j, path, {"kind", "shape", "pad"});
    const Vector s = get_vector(need(j, path, "shape"), join(path, "shape"));
    std::vector<Index> shape;
    for (Index i = 0; i < s.size(); ++i) {
      if (s[i] < 1 || s[i] != std::floor(s[i])) {
        throw ConfigError("\"" + join(path, "shape") + "\" entries must be positive integers", join(path, "shape"));
      }
      shape.push_back(static_cast<Index>(s[i]));
    }
    const Index pad = j.contains("pad") ? static_cast<Index>(get_int(j.at("pad"), join(path, "pad"))) : 0;
    return wrap(path, [&] { return ForwardOperator::dft_magnitude(std::move(shape), pad); });
  }
  if (kind == "toy_nonlinear") {
    reject_unknown(j, path, {"kind", "dim", "hidden", "seed"});
    const Index d = get_dim(need(j, path, "dim"), join(path, "dim"));
    const Index h = j.contains("hidden") ? get_dim(j.at("hidden"), join(path, "hidden")) : 8;
    const std::uint64_t seed = j.contains("seed") ? get_seed(j.at("seed"), join(path, "seed")) : 0;
    return wrap(path, [&] { return ForwardOperator::toy_nonlinear(d, h, seed); });
  }
  throw ConfigError("\"" + join(path, "kind") +
                        "\" must be one of inpaint, avgpool, conv_blur, hdr_clip, dft_magnitude, "
                        "toy_nonlinear (got \"" + kind + "\")",
                    join(path, "kind"));
}

Json operator_to_json(const ForwardOperator& op) {
  Json j;
  j["kind"] = std::string(to_string(op.kind()));
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ForwardOperator::Inpaint>) {
          Json m = Json::array();
          for (auto b : p.mask) m.push_back(static_cast<int>(b));
          j["mask"] = m;
        } else if constexpr (std::is_same_v<P, ForwardOperator::AvgPool>) {
          j["dim"] = op.in_dim();
          j["factor"] = p.factor;
        } else if constexpr (std::is_same_v<P, ForwardOperator::ConvBlur>) {
          j["dim"] = op.in_dim();
          j["kernel"] = flat(p.kernel);
        } else if constexpr (std::is_same_v<P, ForwardOperator::HdrClip>) {
          j["dim"] = op.in_dim();
          j["scale"] = p.scale;
        } else if constexpr (std::is_same_v<P, ForwardOperator::DftMagnitude>) {
          j["shape"] = p.shape;
          j["pad"] = p.pad;
        } else {
          j["dim"] = op.in_dim();
          j["hidden"] = p.hidden;
          j["seed"] = p.seed;
        }
      },
      op.params());
  return j;
}

Json sampler_to_json(const SamplerConfig& cfg) {
  return Json{{"tau", cfg.tau},
              {"n_steps", cfg.n_steps},
              {"warm_steps", cfg.warm_steps},
              {"adam_lr", cfg.adam_lr},
              {"adam_beta1", cfg.adam_beta1},
              {"adam_beta2", cfg.adam_beta2},
              {"adam_eps", cfg.adam_eps},
              {"scheme", std::string(to_string(cfg.scheme))},
              {"seed", cfg.seed},
              {"burn_in", cfg.burn_in},
              {"thinning", cfg.thinning}};
}

SamplerConfig sampler_from_json(const Json& j, const std::string& path) {
  need_object(j, path);
  reject_unknown(j, path, kSamplerKeys);
  SamplerConfig cfg;
  auto num = [&](const char* key, double& out) {
    if (j.contains(key)) out = get_number(j.at(key), join(path, key));
  };
  auto integer = [&](const char* key, std::int64_t& out) {
    if (j.contains(key)) out = get_int(j.at(key), join(path, key));
  };
  num("tau", cfg.tau);
  integer("n_steps", cfg.n_steps);
  integer("warm_steps", cfg.warm_steps);
  num("adam_lr", cfg.adam_lr);
  num("adam_beta1", cfg.adam_beta1);
  num("adam_beta2", cfg.adam_beta2);
  num("adam_eps", cfg.adam_eps);
  integer("burn_in", cfg.burn_in);
  integer("thinning", cfg.thinning);
  if (j.contains("seed")) cfg.seed = get_seed(j.at("seed"), join(path, "seed"));
  if (j.contains("scheme")) {
    const auto s = get_string(j.at("scheme"), join(path, "scheme"));
    if (s == "em") {
      cfg.scheme = Scheme::em;
    } else if (s == "ei") {
      cfg.scheme = Scheme::ei;
    } else {
      throw ConfigError("\"" + join(path, "scheme") + "\" must be \"em\" or \"ei\"", join(path, "scheme"));
    }
  }
  wrap(path, [&] {
    cfg.validate();
    return 0;
  });
  return cfg;
}

Json ExperimentConfig::to_json() const {
  Json m;
  switch (measurement.source) {
    case MeasurementSpec::Source::synthesize:
      m["source"] = "synthesize";
      if (measurement.ground_truth) {
        m["ground_truth"] = flat(*measurement.ground_truth);
      } else {
        m["ground_truth_seed"] = measurement.ground_truth_seed;
      }
      m["noise_seed"] = measurement.noise_seed;
      break;
    case MeasurementSpec::Source::file:
      m["source"] = "file";
      m["path"] = measurement.path.string();
      break;
    case MeasurementSpec::Source::values:
      m["source"] = "values";
      m["values"] = flat(measurement.values);
      break;
  }
  m["sigma"] = measurement.sigma;
  Json j{{"map", map_spec},
         {"operator", operator_spec},
         {"measurement", m},
         {"sampler", sampler_to_json(sampler)},
         {"chains", chains},
         {"output_dir", output_dir.string()},
         {"metrics", {{"psnr", metrics.psnr}, {"diversity", metrics.diversity}, {"cosine", metrics.cosine}}}};
  if (images) j["images"] = {{"width", images->width}, {"height", images->height}};
  return j;
}

fs::path default_output_root() {
  if (const char* env = std::getenv("NSL_OUTPUT_ROOT"); env != nullptr && *env != '\0') return env;
  return "runs";
}

ExperimentConfig config_from_json(const Json& j, const fs::path& base_dir) {
  need_object(j, "config");
  reject_unknown(j, "", kTopKeys);
  ExperimentConfig cfg;

  cfg.map_spec = need(j, "", "map");
  const GenerativeMap map = map_from_json(cfg.map_spec, "map");
  cfg.operator_spec = need(j, "", "operator");
  const ForwardOperator op = operator_from_json(cfg.operator_spec, "operator");
  if (op.in_dim() != map.dim()) {
    throw ConfigError("\"operator\" input dimension " + std::to_string(op.in_dim()) +
                          " does not match \"map\" dimension " + std::to_string(map.dim()),
                      "operator");
  }

  if (j.contains("sampler")) cfg.sampler = sampler_from_json(j.at("sampler"), "sampler");

  if (j.contains("chains")) {
    const auto c = get_int(j.at("chains"), "chains");
    if (c < 1 || c > 4096) throw ConfigError("\"chains\" must be in [1, 4096]", "chains");
    cfg.chains = static_cast<int>(c);
  }

  // Measurement.
  const Json mj = j.contains("measurement") ? j.at("measurement") : Json::object();
  need_object(mj, "measurement");
  reject_unknown(mj, "measurement", kMeasurementKeys);
  auto& ms = cfg.measurement;
  if (mj.contains("source")) {
    const auto s = get_string(mj.at("source"), "measurement.source");
    if (s == "synthesize") {
      ms.source = MeasurementSpec::Source::synthesize;
    } else if (s == "file") {
      ms.source = MeasurementSpec::Source::file;
    } else if (s == "values") {
      ms.source = MeasurementSpec::Source::values;
    } else {
      throw ConfigError("\"measurement.source\" must be synthesize, file or values", "measurement.source");
    }
  } else if (mj.contains("values")) {
    ms.source = MeasurementSpec::Source::values;
  } else if (mj.contains("path")) {
    ms.source = MeasurementSpec::Source::file;
  }
  if (mj.contains("sigma")) ms.sigma = get_number(mj.at("sigma"), "measurement.sigma");
  if (!(ms.sigma > 0.0)) throw ConfigError("\"measurement.sigma\" must be positive", "measurement.sigma");

  auto forbid = [&](const char* key, const char* source) {
    if (mj.contains(key)) {
      throw ConfigError(std::string("\"measurement.") + key + "\" is not used with source \"" + source + "\"",
                        std::string("measurement.") + key);
    }
  };
  Index meas_len = -1;
  switch (ms.source) {
    case MeasurementSpec::Source::synthesize:
      forbid("path", "synthesize");
      forbid("values", "synthesize");
      if (mj.contains("noise_seed")) ms.noise_seed = get_seed(mj.at("noise_seed"), "measurement.noise_seed");
      if (mj.contains("ground_truth")) {
        if (mj.contains("ground_truth_seed")) {
          throw ConfigError("\"measurement.ground_truth\" and \"measurement.ground_truth_seed\" are exclusive",
                            "measurement.ground_truth");
        }
        ms.ground_truth = get_vector(mj.at("ground_truth"), "measurement.ground_truth");
        if (ms.ground_truth->size() != map.dim()) {
          throw ConfigError("\"measurement.ground_truth\" length " + std::to_string(ms.ground_truth->size()) +
                                " does not match \"map\" dimension " + std::to_string(map.dim()),
                            "measurement.ground_truth");
        }
      } else if (mj.contains("ground_truth_seed")) {
        ms.ground_truth_seed = get_seed(mj.at("ground_truth_seed"), "measurement.ground_truth_seed");
      }
      break;
    case MeasurementSpec::Source::file: {
      forbid("values", "file");
      forbid("ground_truth", "file");
      forbid("ground_truth_seed", "file");
      forbid("noise_seed", "file");
      ms.path = get_string(need(mj, "measurement", "path"), "measurement.path");
      if (ms.path.is_relative() && !base_dir.empty()) ms.path = base_dir / ms.path;
      try {
        ms.values = read_vector_file(ms.path);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("\"measurement.path\": ") + e.what(), "measurement.path");
      }
      meas_len = ms.values.size();
      break;
    }
    case MeasurementSpec::Source::values:
      forbid("path", "values");
      forbid("ground_truth", "values");
      forbid("ground_truth_seed", "values");
      forbid("noise_seed", "values");
      ms.values = get_vector(need(mj, "measurement", "values"), "measurement.values");
      meas_len = ms.values.size();
      break;
  }
  if (meas_len >= 0 && meas_len != op.out_dim()) {
    const std::string key = ms.source == MeasurementSpec::Source::file ? "measurement.path" : "measurement.values";
    throw ConfigError("\"operator\" output dimension " + std::to_string(op.out_dim()) + " does not match \"" +
                          key + "\" length " + std::to_string(meas_len),
                      key);
  }

  if (j.contains("output_dir")) {
    cfg.output_dir = get_string(j.at("output_dir"), "output_dir");
    if (cfg.output_dir.is_relative() && !base_dir.empty()) cfg.output_dir = (base_dir / cfg.output_dir).lexically_normal();
  } else {
    cfg.output_dir = default_output_root() / "run";
  }

  if (j.contains("metrics")) {
    const auto& mt = j.at("metrics");
    need_object(mt, "metrics");
    reject_unknown(mt, "metrics", kMetricKeys);
    if (mt.contains("psnr")) cfg.metrics.psnr = get_bool(mt.at("psnr"), "metrics.psnr");
    if (mt.contains("diversity")) cfg.metrics.diversity = get_bool(mt.at("diversity"), "metrics.diversity");
    if (mt.contains("cosine")) cfg.metrics.cosine = get_bool(mt.at("cosine"), "metrics.cosine");
  }

  if (j.contains("images")) {
    const auto& im = j.at("images");
    need_object(im, "images");
    reject_unknown(im, "images", kImageKeys);
    ImageOptions o;
    o.width = get_dim(need(im, "images", "width"), "images.width");
    o.height = get_dim(need(im, "images", "height"), "images.height");
    if (o.width * o.height != map.dim()) {
      throw ConfigError("\"images.width\" x \"images.height\" = " + std::to_string(o.width * o.height) +
                            " does not match \"map\" dimension " + std::to_string(map.dim()),
                        "images");
    }
    cfg.images = o;
  }
  return cfg;
}

ExperimentConfig parse_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": parse error: " + e.what());
  }
  ExperimentConfig cfg = config_from_json(j, path.parent_path());
  if (!j.contains("output_dir")) cfg.output_dir = default_output_root() / path.stem();
  return cfg;
}

}  // namespace nsl
