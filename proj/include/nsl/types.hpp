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

#ifndef NSL_TYPES_HPP_
#define NSL_TYPES_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nsl {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Noise-space points x1 / z^i, data-space points x0, and cotangents share a
// representation; the aliases document which space a value lives in.
using NoiseVector = Vector;
using DataVector = Vector;
using Cotangent = Vector;

// Raised when a caller breaks an operation's precondition (dimension
// mismatch, parameter out of range, malformed payload).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite loss or gradient encountered while iterating.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::int64_t step)
      : std::runtime_error(what), step_(step) {}
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

// A density grid does not cover the effective support of its density.
class SupportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Zero evidence: the observation is impossible under the prior.
class IllPosedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A proved inequality failed numerically. Indicates a bug, not bad input.
class TheoremViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Metric undefined for the sample set (e.g. zero intra-cluster spread).
class DegenerateSetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractViolation(msg);
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace nsl

#endif  // NSL_TYPES_HPP_
