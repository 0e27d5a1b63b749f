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
#include "vesselcast/rng.hpp"

#include <sstream>
#include <stdexcept>

namespace vesselcast
{

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::normal() { return normal_(engine_); }

double Rng::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

int Rng::uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

Tensor Rng::normal_tensor(const Shape & shape)
{
  Tensor t(shape);
  fill_normal(t);
  return t;
}

void Rng::fill_normal(Tensor & t)
{
  for (double & v : t.storage()) {
    v = normal();
  }
}

std::string Rng::state() const
{
  std::ostringstream out;
  out << engine_ << ' ' << normal_;
  return out.str();
}

void Rng::set_state(const std::string & state)
{
  std::istringstream in(state);
  std::mt19937_64 engine;
  std::normal_distribution<double> normal;
  in >> engine >> normal;
  if (in.fail()) {
    throw std::invalid_argument("malformed rng state");
  }
  engine_ = engine;
  normal_ = normal;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index)
{
  std::seed_seq seq{
    static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace vesselcast
