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
#ifndef VESSELCAST__GRAPH_HPP_
#define VESSELCAST__GRAPH_HPP_

#include "vesselcast/geo.hpp"
#include "vesselcast/tensor.hpp"

#include <optional>

namespace vesselcast
{

struct Scene;

/// Interaction boundary in hectometres; std::nullopt removes the boundary.
using InteractionBoundary = std::optional<double>;

inline constexpr double kDefaultTau = 50.0;

/// Reciprocal-distance edge weight, non-zero only for 0 < d < tau.
double edge_weight(const LocalXY & a, const LocalXY & b, InteractionBoundary tau = kDefaultTau);

/// T_obs x V x V weighted adjacency stack.
struct DynamicAdjacency
{
  Tensor a;
  InteractionBoundary tau = kDefaultTau;

  std::size_t steps() const { return a.dim(0); }
  std::size_t vessels() const { return a.dim(1); }
};

/// I - D^{-1/2} A D^{-1/2} per step, with D^{-1/2} := 0 on isolated nodes.
struct NormalizedAdjacency
{
  Tensor a_hat;

  std::size_t steps() const { return a_hat.dim(0); }
  std::size_t vessels() const { return a_hat.dim(1); }
};

/// Adjacency over the observed steps of a 2 x V x T_obs position tensor.
DynamicAdjacency build_adjacency(const Tensor & observed, InteractionBoundary tau = kDefaultTau);
DynamicAdjacency build_adjacency(const Scene & scene, InteractionBoundary tau = kDefaultTau);

NormalizedAdjacency normalize_adjacency(const DynamicAdjacency & adjacency);

/// Convenience: normalize_adjacency(build_adjacency(observed, tau)).a_hat
Tensor scene_graph(const Tensor & observed, InteractionBoundary tau = kDefaultTau);

}  // namespace vesselcast

#endif  // VESSELCAST__GRAPH_HPP_
