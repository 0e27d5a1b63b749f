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
#include "vesselcast/frame.hpp"

#include <stdexcept>

namespace vesselcast
{

namespace
{

void check(const Tensor & t, const Tensor & x, double scale)
{
  if (x.rank() != 3 || x.dim(2) == 0) {
    throw ShapeError("observed positions must be F x V x T_obs, got " + shape_to_string(x.shape()));
  }
  if (t.rank() != 3 || t.dim(0) != x.dim(0) || t.dim(1) != x.dim(1)) {
    throw ShapeError(
      "positions " + shape_to_string(t.shape()) + " do not match history " +
      shape_to_string(x.shape()));
  }
  if (!(scale > 0.0)) {
    throw std::invalid_argument("frame scale must be positive");
  }
}

Tensor shifted(const Tensor & t, const Tensor & x, double sign, double scale)
{
  check(t, x, scale);
  const std::size_t last = x.dim(2) - 1;
  Tensor out(t.shape());
  for (std::size_t f = 0; f < t.dim(0); ++f) {
    for (std::size_t v = 0; v < t.dim(1); ++v) {
      const double anchor = x.at(f, v, last);
      for (std::size_t i = 0; i < t.dim(2); ++i) {
        out.at(f, v, i) = sign > 0.0 ? t.at(f, v, i) * scale + anchor
                                     : (t.at(f, v, i) - anchor) / scale;
      }
    }
  }
  return out;
}

}  // namespace

Tensor history_offsets(const Tensor & x, double scale) { return shifted(x, x, -1.0, scale); }

Tensor future_offsets(const Tensor & y, const Tensor & x, double scale)
{
  return shifted(y, x, -1.0, scale);
}

Tensor future_positions(const Tensor & offsets, const Tensor & x, double scale)
{
  return shifted(offsets, x, 1.0, scale);
}

}  // namespace vesselcast
