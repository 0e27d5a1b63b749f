// Copyright 2026 The vesselcast Authors
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
#ifndef VESSELCAST__RNG_HPP_
#define VESSELCAST__RNG_HPP_

#include "vesselcast/tensor.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace vesselcast
{

/// Seeded generator used everywhere randomness enters. The full state,
/// including the normal distribution's cached variate, serializes to text.
class Rng
{
public:
  explicit Rng(std::uint64_t seed = 0);

  double normal();
  double uniform();
  /// Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi);
  std::uint64_t next_u64() { return engine_(); }

  Tensor normal_tensor(const Shape & shape);
  void fill_normal(Tensor & t);

  std::string state() const;
  void set_state(const std::string & state);

  std::mt19937_64 & engine() { return engine_; }

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Stable sub-seed for (base, stream, index); used to give every sample or
/// scene its own independent generator.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

}  // namespace vesselcast

#endif  // VESSELCAST__RNG_HPP_
