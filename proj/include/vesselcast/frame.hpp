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
#ifndef VESSELCAST__FRAME_HPP_
#define VESSELCAST__FRAME_HPP_

#include "vesselcast/tensor.hpp"

namespace vesselcast
{

/// Positions re-expressed as offsets from each vessel's last observed
/// point, divided by \p scale. This is the frame the denoiser works in:
/// the graph is still built from absolute positions.
Tensor history_offsets(const Tensor & x, double scale = 1.0);
Tensor future_offsets(const Tensor & y, const Tensor & x, double scale = 1.0);
/// Inverse of future_offsets.
Tensor future_positions(const Tensor & offsets, const Tensor & x, double scale = 1.0);

}  // namespace vesselcast

#endif  // VESSELCAST__FRAME_HPP_
