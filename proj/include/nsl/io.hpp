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

#ifndef NSL_IO_HPP_
#define NSL_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nsl/samplers.hpp"
#include "nsl/types.hpp"

namespace nsl {

// I/O failure; the message carries the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes `bytes` to a sibling temporary file and renames it over `path`, so
// `path` only ever holds a complete file. Creates parent directories.
void atomic_write_file(const std::filesystem::path& path, std::string_view bytes);

// Shortest-safe text form: 17 significant digits, "%.17g" style.
std::string format_double(double v);

// "chain,step,x0_0,...,x0_{d-1}" then one row per retained sample. `dim`
// fixes the header width when no sample was retained; -1 infers it.
std::string samples_csv(std::span<const RunReport> reports, Index dim = -1);
void write_samples(const RunReport& report, const std::filesystem::path& path,
                   Index dim = -1);
void write_samples(std::span<const RunReport> reports,
                   const std::filesystem::path& path, Index dim = -1);

struct SampleRow {
  std::uint32_t chain = 0;
  std::int64_t step = 0;
  DataVector values;
};
std::vector<SampleRow> read_samples(const std::filesystem::path& path);

// Pixel byte for value v in [-1, 1]: round((v + 1) / 2 * 255), half up,
// clamped to [0, 255].
std::uint8_t pgm_byte(double v);
std::string pgm_bytes(const DataVector& image, Index width, Index height);
void write_pgm(const DataVector& image, Index width, Index height,
               const std::filesystem::path& path);

// Numbers separated by commas or whitespace; '#' starts a comment line.
Vector read_vector_file(const std::filesystem::path& path);

}  // namespace nsl

#endif  // NSL_IO_HPP_
