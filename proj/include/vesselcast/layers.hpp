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
#ifndef VESSELCAST__LAYERS_HPP_
#define VESSELCAST__LAYERS_HPP_

#include "vesselcast/tensor.hpp"

#include <vector>

// Forward/backward kernels on C x V x T feature tensors. Backward functions
// accumulate into the supplied parameter gradients and return the input
// gradient.

namespace vesselcast::layers
{

// out[o, v, t] = sum_i w[o, i] in[i, v, t] + b[o]
Tensor conv1x1_forward(const Tensor & in, const Tensor & w, const Tensor & b);
Tensor conv1x1_backward(
  const Tensor & in, const Tensor & w, const Tensor & d_out, Tensor & d_w, Tensor & d_b);

// Temporal convolution, kernel 3, stride 2, zero padding 1: T -> ceil(T / 2).
Tensor downsample_forward(const Tensor & in, const Tensor & w, const Tensor & b);
Tensor downsample_backward(
  const Tensor & in, const Tensor & w, const Tensor & d_out, Tensor & d_w, Tensor & d_b);

// Nearest-neighbour x2 along time, cropped to \p length.
Tensor upsample_forward(const Tensor & in, std::size_t length);
Tensor upsample_backward(const Tensor & d_out, std::size_t in_length);

Tensor concat_channels(const Tensor & a, const Tensor & b);
void split_channels(const Tensor & d_cat, std::size_t first, Tensor & d_a, Tensor & d_b);

struct NormCache
{
  Tensor normalized;
  std::vector<double> inv_std;
};

inline constexpr double kNormEpsilon = 1e-5;

// Per-channel normalization over (V, T) with learned gain and bias.
Tensor group_norm_forward(
  const Tensor & in, const Tensor & gain, const Tensor & bias, NormCache * cache);
Tensor group_norm_backward(
  const NormCache & cache, const Tensor & gain, const Tensor & d_out, Tensor & d_gain,
  Tensor & d_bias);

// Batched graph aggregation G[h][c, v, t] = sum_u A_hat[h, v, u] in[c, u, t].
std::vector<Tensor> graph_aggregate(const Tensor & in, const Tensor & a_hat);

// Graph-convolution contraction H_gc[o, v, t] = sum_{c,h} theta[c, o, h] G[h][c, v, t] + b[o].
Tensor graph_contract(const std::vector<Tensor> & aggregated, const Tensor & theta, const Tensor & b);

// Backward of graph_contract followed by graph_aggregate; returns d_in.
Tensor graph_conv_backward(
  const std::vector<Tensor> & aggregated, const Tensor & a_hat, const Tensor & theta,
  const Tensor & d_gc, Tensor & d_theta, Tensor & d_b);

// out[f, v, s] = sum_t w[s, t] in[f, v, t] + b[s]
Tensor time_fc_forward(const Tensor & in, const Tensor & w, const Tensor & b);
Tensor time_fc_backward(
  const Tensor & in, const Tensor & w, const Tensor & d_out, Tensor & d_w, Tensor & d_b);

Tensor relu(const Tensor & in);
// d_out where pre > 0, else 0.
Tensor relu_backward(const Tensor & pre, const Tensor & d_out);

double silu(double x);
double silu_grad(double x);

}  // namespace vesselcast::layers

#endif  // VESSELCAST__LAYERS_HPP_
