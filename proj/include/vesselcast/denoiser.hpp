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
#ifndef VESSELCAST__DENOISER_HPP_
#define VESSELCAST__DENOISER_HPP_

#include "vesselcast/diffusion.hpp"
#include "vesselcast/layers.hpp"
#include "vesselcast/params.hpp"
#include "vesselcast/rng.hpp"
#include "vesselcast/tensor.hpp"

#include <span>
#include <vector>

namespace vesselcast
{

struct DenoiserConfig
{
  std::size_t channels = 32;
  std::size_t levels = 4;
  std::size_t blocks_per_level = 2;
  std::size_t features = 2;
  std::size_t t_obs = 10;
  std::size_t t_pred = 15;
  // Ablation switches.
  bool disable_unet = false;
  bool disable_dgc = false;
  bool disable_residual = false;

  /// Throws std::invalid_argument for an unusable configuration.
  void validate() const;
  std::size_t total_length() const { return t_obs + t_pred; }

  bool operator==(const DenoiserConfig &) const = default;
};

/// e[2i] = sin(k / 10000^(2i/dim)), e[2i+1] = cos(k / 10000^(2i/dim)).
std::vector<double> sinusoidal_embedding(double k, std::size_t dim);

/// relu(sum_{c,h} theta[c, o, h] (A_hat[h] H_hat)[c, v, t] + b[o] + H_hat),
/// the residual term being dropped when \p residual is false.
Tensor dynamic_graph_conv(
  const Tensor & h_hat, const Tensor & a_hat, const Tensor & theta, const Tensor & b,
  bool residual = true);

/// Weights of one residual block. mix_w is the graph kernel theta
/// (C x C x T_obs), or a C x C channel map when the graph convolution is
/// disabled.
struct ResidualBlockWeights
{
  const Tensor & norm_gain;
  const Tensor & norm_bias;
  const Tensor & emb_w;
  const Tensor & emb_b;
  const Tensor & mix_w;
  const Tensor & mix_b;
};

struct ResidualBlockGrads
{
  Tensor & norm_gain;
  Tensor & norm_bias;
  Tensor & emb_w;
  Tensor & emb_b;
  Tensor & mix_w;
  Tensor & mix_b;
};

struct BlockOptions
{
  bool use_graph = true;
  bool residual = true;
};

struct BlockCache
{
  layers::NormCache norm;
  Tensor h_hat;
  std::vector<Tensor> aggregated;
  Tensor pre_activation;
};

/// normalize -> add projected step embedding -> graph conv (+ residual) -> relu.
Tensor residual_block_forward(
  const Tensor & h, std::span<const double> step_embedding, const Tensor & a_hat,
  const ResidualBlockWeights & w, const BlockOptions & options, BlockCache * cache = nullptr);

/// Returns d_h; accumulates d_step_embedding and the weight gradients.
Tensor residual_block_backward(
  const BlockCache & cache, std::span<const double> step_embedding, const Tensor & a_hat,
  const ResidualBlockWeights & w, const BlockOptions & options, const Tensor & d_out,
  ResidualBlockGrads grads, std::span<double> d_step_embedding);

struct ForwardCache
{
  Tensor a_hat;
  Tensor input;  // x and y_k joined along time
  std::vector<double> sinusoid;
  std::vector<double> emb_pre;
  std::vector<double> emb;
  std::vector<BlockCache> blocks;
  std::vector<Tensor> skips;
  std::vector<std::size_t> up_input_lengths;
  std::vector<Tensor> fuse_inputs;
  Tensor head_input;
  Tensor head_output;
};

/// U-shaped denoiser over F x V x (T_obs + T_pred) with graph-conv residual
/// blocks. Parameters are held outside the network so one instance can be
/// shared by concurrent read-only evaluations.
class TrajUGnet
{
public:
  explicit TrajUGnet(DenoiserConfig config);

  const DenoiserConfig & config() const { return config_; }
  /// Zero-valued parameters with the network's layout.
  const ParamSet & layout() const { return layout_; }
  /// Fan-in uniform weights, unit norm gains, zero biases, zero output
  /// projection and a crop-identity time map.
  ParamSet init_params(Rng & rng) const;

  /// Time lengths of the U-net levels, finest first.
  const std::vector<std::size_t> & level_lengths() const { return lengths_; }

  /// Learned step embedding SiLU(W sinusoid(k) + b).
  std::vector<double> step_embedding(const ParamSet & params, int k) const;

  Tensor forward(
    const ParamSet & params, const Tensor & y_k, int k, const Tensor & x, const Tensor & a_hat,
    ForwardCache * cache = nullptr) const;

  /// Accumulates d(out . d_out)/d(params) into \p grads.
  void backward(const ParamSet & params, const ForwardCache & cache, const Tensor & d_out,
                ParamSet & grads) const;

private:
  struct BlockSlots
  {
    std::size_t gain, bias, emb_w, emb_b, mix_w, mix_b;
  };
  struct Level
  {
    std::vector<BlockSlots> down_blocks;
    std::size_t down_w = 0, down_b = 0;
    std::size_t fuse_w = 0, fuse_b = 0;
    std::vector<BlockSlots> up_blocks;
  };

  BlockSlots add_block(const std::string & prefix, std::size_t channels);
  BlockOptions block_options() const;
  ResidualBlockWeights weights(const ParamSet & p, const BlockSlots & s) const;
  void check_inputs(const Tensor & y_k, const Tensor & x, const Tensor & a_hat) const;

  DenoiserConfig config_;
  std::size_t unet_levels_ = 0;
  ParamSet layout_;
  std::vector<std::size_t> lengths_;
  std::size_t embed_w_ = 0, embed_b_ = 0, in_w_ = 0, in_b_ = 0;
  std::size_t out_w_ = 0, out_b_ = 0, fc_w_ = 0, fc_b_ = 0;
  std::vector<Level> levels_;
  std::vector<BlockSlots> mid_blocks_;
};

/// NoisePredictor view over a network and a parameter set.
class UGnetPredictor : public NoisePredictor
{
public:
  UGnetPredictor(const TrajUGnet & net, const ParamSet & params) : net_(net), params_(params) {}

  Tensor predict_noise(
    const Tensor & y_k, int k, const Tensor & x, const Tensor & a_hat) const override
  {
    return net_.forward(params_, y_k, k, x, a_hat);
  }

private:
  const TrajUGnet & net_;
  const ParamSet & params_;
};

}  // namespace vesselcast

#endif  // VESSELCAST__DENOISER_HPP_
