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

#ifndef NSL_RNG_HPP_
#define NSL_RNG_HPP_

#include <array>
#include <cstdint>
#include <span>

#include "nsl/types.hpp"

namespace nsl {

// Philox4x32 with 10 rounds (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

// Separates independent uses of one seed so they never share counters.
enum class StreamPurpose : std::uint32_t {
  chain_init = 1,
  langevin = 2,
  measurement = 3,
  map_noise = 4,
  weights = 5,
  clustering = 6,
  resampling = 7,
  ground_truth = 8,
  generic = 15,
};

// Counter-based stream. Draw j at counter `step` is a pure function of
// (seed, chain, purpose, step, j), so streams can be evaluated in any order
// and from any thread.
//
// Counter layout: {block, step_lo, step_hi, purpose << 24 | chain}; the key
// is the 64-bit seed. Chain indices are limited to 24 bits.
class NormalStream {
 public:
  NormalStream() = default;
  NormalStream(std::uint64_t seed, std::uint32_t chain, StreamPurpose purpose);

  std::uint64_t seed() const { return seed_; }
  std::uint32_t chain() const { return chain_; }

  // Uniforms in the open interval (0, 1), 53-bit resolution.
  void fill_uniform(std::uint64_t step, std::span<double> out) const;
  // Standard normals via Box-Muller on consecutive uniform pairs.
  void fill_normal(std::uint64_t step, std::span<double> out) const;

  Vector normal(std::uint64_t step, Index n) const;
  Vector uniform(std::uint64_t step, Index n) const;

 private:
  std::array<std::uint32_t, 4> block(std::uint64_t step,
                                     std::uint32_t index) const;

  std::uint64_t seed_ = 0;
  std::uint32_t chain_ = 0;
  StreamPurpose purpose_ = StreamPurpose::generic;
};

}  // namespace nsl

#endif  // NSL_RNG_HPP_
