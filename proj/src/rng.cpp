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

#include "nsl/rng.hpp"

#include <cmath>
#include <numbers>

namespace nsl {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double to_open_unit(std::uint32_t a, std::uint32_t b) {
  const std::uint64_t bits =
      ((static_cast<std::uint64_t>(a) << 32) | b) >> 11;  // 53 bits
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

NormalStream::NormalStream(std::uint64_t seed, std::uint32_t chain,
                           StreamPurpose purpose)
    : seed_(seed), chain_(chain), purpose_(purpose) {
  require(chain < (1u << 24), "NormalStream: chain index exceeds 24 bits");
}

std::array<std::uint32_t, 4> NormalStream::block(std::uint64_t step,
                                                 std::uint32_t index) const {
  const std::array<std::uint32_t, 4> ctr = {
      index, static_cast<std::uint32_t>(step),
      static_cast<std::uint32_t>(step >> 32),
      (static_cast<std::uint32_t>(purpose_) << 24) | chain_};
  const std::array<std::uint32_t, 2> key = {
      static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
  return philox4x32_10(ctr, key);
}

void NormalStream::fill_uniform(std::uint64_t step,
                                std::span<double> out) const {
  for (std::size_t j = 0; j < out.size(); j += 2) {
    const auto r = block(step, static_cast<std::uint32_t>(j / 2));
    out[j] = to_open_unit(r[0], r[1]);
    if (j + 1 < out.size()) out[j + 1] = to_open_unit(r[2], r[3]);
  }
}

void NormalStream::fill_normal(std::uint64_t step,
                               std::span<double> out) const {
  for (std::size_t j = 0; j < out.size(); j += 2) {
    const auto r = block(step, static_cast<std::uint32_t>(j / 2));
    const double u1 = to_open_unit(r[0], r[1]);
    const double u2 = to_open_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[j] = radius * std::cos(angle);
    if (j + 1 < out.size()) out[j + 1] = radius * std::sin(angle);
  }
}

Vector NormalStream::normal(std::uint64_t step, Index n) const {
  Vector v(n);
  fill_normal(step, std::span<double>(v.data(), static_cast<std::size_t>(n)));
  return v;
}

Vector NormalStream::uniform(std::uint64_t step, Index n) const {
  Vector v(n);
  fill_uniform(step, std::span<double>(v.data(), static_cast<std::size_t>(n)));
  return v;
}

}  // namespace nsl
