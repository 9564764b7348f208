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

#include "nsl/io.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace nsl {

namespace fs = std::filesystem;

namespace {

std::atomic<std::uint64_t> g_temp_counter{0};

double parse_double(std::string_view tok, const fs::path& path, std::size_t line) {
  double v = 0.0;
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw IoError(path.string() + ":" + std::to_string(line) + ": not a number: \"" + std::string(tok) + "\"");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

void atomic_write_file(const fs::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(g_temp_counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw IoError("format_double: conversion failed");
  return std::string(buf, ptr);
}

std::string samples_csv(std::span<const RunReport> reports, Index dim) {
  Index d = dim;
  for (const auto& r : reports) {
    for (const auto& s : r.samples) {
      require(d < 0 || s.size() == d, "write_samples: sample length does not match header width");
      d = s.size();
    }
  }
  d = std::max<Index>(d, 0);
  std::string out = "chain,step";
  for (Index i = 0; i < d; ++i) out += ",x0_" + std::to_string(i);
  out += "\n";
  for (const auto& r : reports) {
    require(r.samples.size() == r.sample_steps.size(), "write_samples: steps and samples disagree");
    for (std::size_t k = 0; k < r.samples.size(); ++k) {
      out += std::to_string(r.chain_index);
      out += ",";
      out += std::to_string(r.sample_steps[k]);
      for (Index i = 0; i < d; ++i) {
        out += ",";
        out += format_double(r.samples[k][i]);
      }
      out += "\n";
    }
  }
  return out;
}

void write_samples(const RunReport& report, const fs::path& path, Index dim) {
  write_samples(std::span<const RunReport>(&report, 1), path, dim);
}

void write_samples(std::span<const RunReport> reports, const fs::path& path, Index dim) {
  atomic_write_file(path, samples_csv(reports, dim));
}

std::vector<SampleRow> read_samples(const fs::path& path) {
  const std::string text = read_all(path);
  std::vector<SampleRow> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      const auto cols = split(line, ',');
      if (cols.size() < 2 || cols[0] != "chain" || cols[1] != "step") {
        throw IoError(path.string() + ":1: expected header starting with \"chain,step\"");
      }
      for (std::size_t i = 2; i < cols.size(); ++i) {
        if (cols[i] != "x0_" + std::to_string(i - 2)) {
          throw IoError(path.string() + ":1: unexpected column \"" + std::string(cols[i]) + "\"");
        }
      }
      width = cols.size();
      continue;
    }
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != width) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(width) +
                    " columns, got " + std::to_string(cols.size()));
    }
    SampleRow row;
    row.chain = static_cast<std::uint32_t>(parse_double(cols[0], path, lineno));
    row.step = static_cast<std::int64_t>(parse_double(cols[1], path, lineno));
    row.values.resize(static_cast<Index>(width - 2));
    for (std::size_t i = 2; i < width; ++i) row.values[static_cast<Index>(i - 2)] = parse_double(cols[i], path, lineno);
    rows.push_back(std::move(row));
  }
  if (lineno == 0) throw IoError(path.string() + ": empty file");
  return rows;
}

std::uint8_t pgm_byte(double v) {
  if (std::isnan(v)) return 0;
  const double scaled = std::floor((v + 1.0) / 2.0 * 255.0 + 0.5);
  return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

std::string pgm_bytes(const DataVector& image, Index width, Index height) {
  require(width > 0 && height > 0, "write_pgm: width and height must be positive");
  require(width * height == image.size(), "write_pgm: width * height (" + std::to_string(width * height) +
                                              ") != image length (" + std::to_string(image.size()) + ")");
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  for (Index i = 0; i < image.size(); ++i) out.push_back(static_cast<char>(pgm_byte(image[i])));
  return out;
}

void write_pgm(const DataVector& image, Index width, Index height, const fs::path& path) {
  atomic_write_file(path, pgm_bytes(image, width, height));
}

Vector read_vector_file(const fs::path& path) {
  const std::string text = read_all(path);
  std::vector<double> vals;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream toks(line);
    std::string tok;
    while (toks >> tok) vals.push_back(parse_double(tok, path, lineno));
  }
  if (vals.empty()) throw IoError(path.string() + ": no values");
  return Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
}

}  // namespace nsl
