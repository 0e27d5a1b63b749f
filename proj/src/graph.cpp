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
#include "vesselcast/graph.hpp"

#include "vesselcast/scene.hpp"

#include <cmath>
#include <stdexcept>

namespace vesselcast
{

double edge_weight(const LocalXY & a, const LocalXY & b, InteractionBoundary tau)
{
  if (tau && !(*tau > 0.0)) {
    throw std::invalid_argument("edge_weight: tau must be positive");
  }
  const double d = std::hypot(a.x - b.x, a.y - b.y);
  if (d > 0.0 && (!tau || d < *tau)) {
    return 1.0 / d;
  }
  return 0.0;
}

DynamicAdjacency build_adjacency(const Tensor & observed, InteractionBoundary tau)
{
  if (observed.rank() != 3 || observed.dim(0) != kFeatures) {
    throw ShapeError("build_adjacency: expected 2 x V x T_obs, got " +
                     shape_to_string(observed.shape()));
  }
  const std::size_t v_count = observed.dim(1);
  const std::size_t steps = observed.dim(2);
  DynamicAdjacency adj{Tensor({steps, v_count, v_count}), tau};
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < v_count; ++i) {
      const LocalXY pi{observed.at(0, i, t), observed.at(1, i, t)};
      for (std::size_t j = i + 1; j < v_count; ++j) {
        const LocalXY pj{observed.at(0, j, t), observed.at(1, j, t)};
        const double w = edge_weight(pi, pj, tau);
        adj.a.at(t, i, j) = w;
        adj.a.at(t, j, i) = w;
      }
    }
  }
  return adj;
}

DynamicAdjacency build_adjacency(const Scene & scene, InteractionBoundary tau)
{
  return build_adjacency(scene.x, tau);
}

NormalizedAdjacency normalize_adjacency(const DynamicAdjacency & adjacency)
{
  const std::size_t steps = adjacency.steps();
  const std::size_t n = adjacency.vessels();
  NormalizedAdjacency out{Tensor({steps, n, n})};
  std::vector<double> inv_sqrt_degree(n);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      double degree = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        degree += adjacency.a.at(t, i, j);
      }
      inv_sqrt_degree[i] = degree > 0.0 ? 1.0 / std::sqrt(degree) : 0.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        // Pairing the degree factors first keeps the result exactly symmetric.
        const double scaled = (inv_sqrt_degree[i] * inv_sqrt_degree[j]) * adjacency.a.at(t, i, j);
        out.a_hat.at(t, i, j) = (i == j ? 1.0 : 0.0) - scaled;
      }
    }
  }
  return out;
}

Tensor scene_graph(const Tensor & observed, InteractionBoundary tau)
{
  return normalize_adjacency(build_adjacency(observed, tau)).a_hat;
}

}  // namespace vesselcast
