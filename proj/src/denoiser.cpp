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
#include "vesselcast/denoiser.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vesselcast
{

namespace L = layers;

void DenoiserConfig::validate() const
{
  if (channels < 1) {
    throw std::invalid_argument("denoiser: channels must be >= 1");
  }
  if (features < 1) {
    throw std::invalid_argument("denoiser: features must be >= 1");
  }
  if (t_obs < 1 || t_pred < 1) {
    throw std::invalid_argument("denoiser: t_obs and t_pred must be >= 1");
  }
  if (blocks_per_level < 1) {
    throw std::invalid_argument("denoiser: blocks_per_level must be >= 1");
  }
  std::size_t length = total_length();
  for (std::size_t l = 0; l < levels; ++l) {
    length = (length + 1) / 2;
  }
  if (length < 1) {
    throw std::invalid_argument("denoiser: time axis collapses to zero length");
  }
  if (!disable_unet && levels > 16) {
    throw std::invalid_argument("denoiser: too many levels");
  }
}

std::vector<double> sinusoidal_embedding(double k, std::size_t dim)
{
  std::vector<double> e(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const std::size_t i = j / 2;
    const double freq = std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(dim));
    e[j] = (j % 2 == 0) ? std::sin(k * freq) : std::cos(k * freq);
  }
  return e;
}

Tensor dynamic_graph_conv(
  const Tensor & h_hat, const Tensor & a_hat, const Tensor & theta, const Tensor & b, bool residual)
{
  if (residual && theta.dim(0) != theta.dim(1)) {
    throw ShapeError("dynamic_graph_conv: the residual add needs C_in == C_out");
  }
  Tensor pre = L::graph_contract(L::graph_aggregate(h_hat, a_hat), theta, b);
  if (residual) {
    for (std::size_t i = 0; i < pre.size(); ++i) {
      pre[i] += h_hat[i];
    }
  }
  return L::relu(pre);
}

Tensor residual_block_forward(
  const Tensor & h, std::span<const double> step_embedding, const Tensor & a_hat,
  const ResidualBlockWeights & w, const BlockOptions & options, BlockCache * cache)
{
  const std::size_t channels = h.dim(0);
  const std::size_t plane = h.dim(1) * h.dim(2);
  L::NormCache norm;
  Tensor h_hat = L::group_norm_forward(h, w.norm_gain, w.norm_bias, cache ? &norm : nullptr);
  for (std::size_t c = 0; c < channels; ++c) {
    double add = w.emb_b[c];
    for (std::size_t j = 0; j < step_embedding.size(); ++j) {
      add += w.emb_w.at(c, j) * step_embedding[j];
    }
    double * dst = h_hat.data() + c * plane;
    for (std::size_t p = 0; p < plane; ++p) {
      dst[p] += add;
    }
  }
  std::vector<Tensor> aggregated;
  Tensor pre;
  if (options.use_graph) {
    aggregated = L::graph_aggregate(h_hat, a_hat);
    pre = L::graph_contract(aggregated, w.mix_w, w.mix_b);
  } else {
    pre = L::conv1x1_forward(h_hat, w.mix_w, w.mix_b);
  }
  if (options.residual) {
    for (std::size_t i = 0; i < pre.size(); ++i) {
      pre[i] += h_hat[i];
    }
  }
  Tensor out = L::relu(pre);
  if (cache != nullptr) {
    cache->norm = std::move(norm);
    cache->h_hat = std::move(h_hat);
    cache->aggregated = std::move(aggregated);
    cache->pre_activation = std::move(pre);
  }
  return out;
}

Tensor residual_block_backward(
  const BlockCache & cache, std::span<const double> step_embedding, const Tensor & a_hat,
  const ResidualBlockWeights & w, const BlockOptions & options, const Tensor & d_out,
  ResidualBlockGrads grads, std::span<double> d_step_embedding)
{
  const Tensor d_pre = L::relu_backward(cache.pre_activation, d_out);
  Tensor d_hhat = options.use_graph
                    ? L::graph_conv_backward(
                        cache.aggregated, a_hat, w.mix_w, d_pre, grads.mix_w, grads.mix_b)
                    : L::conv1x1_backward(cache.h_hat, w.mix_w, d_pre, grads.mix_w, grads.mix_b);
  if (options.residual) {
    for (std::size_t i = 0; i < d_hhat.size(); ++i) {
      d_hhat[i] += d_pre[i];
    }
  }
  const std::size_t channels = d_hhat.dim(0);
  const std::size_t plane = d_hhat.dim(1) * d_hhat.dim(2);
  for (std::size_t c = 0; c < channels; ++c) {
    double d_add = 0.0;
    const double * g = d_hhat.data() + c * plane;
    for (std::size_t p = 0; p < plane; ++p) {
      d_add += g[p];
    }
    grads.emb_b[c] += d_add;
    for (std::size_t j = 0; j < step_embedding.size(); ++j) {
      grads.emb_w.at(c, j) += d_add * step_embedding[j];
      d_step_embedding[j] += d_add * w.emb_w.at(c, j);
    }
  }
  return L::group_norm_backward(cache.norm, w.norm_gain, d_hhat, grads.norm_gain, grads.norm_bias);
}

TrajUGnet::TrajUGnet(DenoiserConfig config) : config_(config)
{
  config_.validate();
  const std::size_t c = config_.channels;
  const std::size_t f = config_.features;
  unet_levels_ = config_.disable_unet ? 0 : config_.levels;

  lengths_.push_back(config_.total_length());
  for (std::size_t l = 0; l < unet_levels_; ++l) {
    lengths_.push_back((lengths_.back() + 1) / 2);
  }

  embed_w_ = layout_.add("embed.w", {c, c});
  embed_b_ = layout_.add("embed.b", {c});
  in_w_ = layout_.add("in_proj.w", {c, f});
  in_b_ = layout_.add("in_proj.b", {c});

  levels_.resize(unet_levels_);
  for (std::size_t l = 0; l < unet_levels_; ++l) {
    const std::size_t ch = c << l;
    const std::string prefix = "down" + std::to_string(l);
    for (std::size_t b = 0; b < config_.blocks_per_level; ++b) {
      levels_[l].down_blocks.push_back(add_block(prefix + ".block" + std::to_string(b), ch));
    }
    levels_[l].down_w = layout_.add(prefix + ".resample.w", {2 * ch, ch, 3});
    levels_[l].down_b = layout_.add(prefix + ".resample.b", {2 * ch});
  }
  // Without the U-net the same number of blocks runs at full resolution.
  const std::size_t mid_count =
    config_.disable_unet ? (2 * config_.levels + 1) * config_.blocks_per_level
                         : config_.blocks_per_level;
  const std::size_t mid_ch = c << unet_levels_;
  for (std::size_t b = 0; b < mid_count; ++b) {
    mid_blocks_.push_back(add_block("mid.block" + std::to_string(b), mid_ch));
  }
  for (std::size_t l = unet_levels_; l-- > 0;) {
    const std::size_t ch = c << l;
    const std::string prefix = "up" + std::to_string(l);
    levels_[l].fuse_w = layout_.add(prefix + ".fuse.w", {ch, 3 * ch});
    levels_[l].fuse_b = layout_.add(prefix + ".fuse.b", {ch});
    for (std::size_t b = 0; b < config_.blocks_per_level; ++b) {
      levels_[l].up_blocks.push_back(add_block(prefix + ".block" + std::to_string(b), ch));
    }
  }
  out_w_ = layout_.add("out_proj.w", {f, c});
  out_b_ = layout_.add("out_proj.b", {f});
  fc_w_ = layout_.add("time_fc.w", {config_.t_pred, config_.total_length()});
  fc_b_ = layout_.add("time_fc.b", {config_.t_pred});
}

TrajUGnet::BlockSlots TrajUGnet::add_block(const std::string & prefix, std::size_t channels)
{
  BlockSlots s{};
  s.gain = layout_.add(prefix + ".norm.gain", {channels});
  s.bias = layout_.add(prefix + ".norm.bias", {channels});
  s.emb_w = layout_.add(prefix + ".emb.w", {channels, config_.channels});
  s.emb_b = layout_.add(prefix + ".emb.b", {channels});
  if (config_.disable_dgc) {
    s.mix_w = layout_.add(prefix + ".tmap.w", {channels, channels});
    s.mix_b = layout_.add(prefix + ".tmap.b", {channels});
  } else {
    s.mix_w = layout_.add(prefix + ".gc.theta", {channels, channels, config_.t_obs});
    s.mix_b = layout_.add(prefix + ".gc.bias", {channels});
  }
  return s;
}

BlockOptions TrajUGnet::block_options() const
{
  return {!config_.disable_dgc, !config_.disable_residual};
}

ResidualBlockWeights TrajUGnet::weights(const ParamSet & p, const BlockSlots & s) const
{
  return {p[s.gain], p[s.bias], p[s.emb_w], p[s.emb_b], p[s.mix_w], p[s.mix_b]};
}

ParamSet TrajUGnet::init_params(Rng & rng) const
{
  ParamSet params = layout_;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string & name = params.name(i);
    Tensor & t = params[i];
    const bool is_weight = name.ends_with(".w") || name.ends_with(".theta");
    if (name.ends_with(".norm.gain")) {
      t.fill(1.0);
    } else if (is_weight && i != out_w_) {
      const std::size_t fan_in = t.size() / t.dim(name.ends_with(".theta") ? 1 : 0);
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (double & v : t.storage()) {
        v = bound * (2.0 * rng.uniform() - 1.0);
      }
    }
  }
  // The time map starts as the crop onto the noisy-future segment, so output
  // step t initially reads the features at input step T_obs + t.
  Tensor & fc = params[fc_w_];
  fc.fill(0.0);
  for (std::size_t t = 0; t < config_.t_pred; ++t) {
    fc.at(t, config_.t_obs + t) = 1.0;
  }
  return params;
}

std::vector<double> TrajUGnet::step_embedding(const ParamSet & params, int k) const
{
  const std::size_t c = config_.channels;
  const auto s = sinusoidal_embedding(static_cast<double>(k), c);
  const Tensor & w = params[embed_w_];
  const Tensor & b = params[embed_b_];
  std::vector<double> e(c);
  for (std::size_t i = 0; i < c; ++i) {
    double pre = b[i];
    for (std::size_t j = 0; j < c; ++j) {
      pre += w.at(i, j) * s[j];
    }
    e[i] = L::silu(pre);
  }
  return e;
}

void TrajUGnet::check_inputs(const Tensor & y_k, const Tensor & x, const Tensor & a_hat) const
{
  const std::size_t f = config_.features;
  if (x.rank() != 3 || x.dim(0) != f || x.dim(2) != config_.t_obs) {
    throw ShapeError("denoiser: x must be " + std::to_string(f) + " x V x " +
                     std::to_string(config_.t_obs) + ", got " + shape_to_string(x.shape()));
  }
  const std::size_t v = x.dim(1);
  if (y_k.rank() != 3 || y_k.dim(0) != f || y_k.dim(1) != v || y_k.dim(2) != config_.t_pred) {
    throw ShapeError("denoiser: y_k must be " + std::to_string(f) + " x " + std::to_string(v) +
                     " x " + std::to_string(config_.t_pred) + ", got " +
                     shape_to_string(y_k.shape()));
  }
  if (a_hat.rank() != 3 || a_hat.dim(0) != config_.t_obs || a_hat.dim(1) != v ||
      a_hat.dim(2) != v) {
    throw ShapeError("denoiser: adjacency must be " + std::to_string(config_.t_obs) + " x " +
                     std::to_string(v) + " x " + std::to_string(v) + ", got " +
                     shape_to_string(a_hat.shape()));
  }
}

Tensor TrajUGnet::forward(
  const ParamSet & p, const Tensor & y_k, int k, const Tensor & x, const Tensor & a_hat,
  ForwardCache * cache) const
{
  check_inputs(y_k, x, a_hat);
  const std::size_t c = config_.channels;
  const BlockOptions options = block_options();

  std::vector<double> sinusoid = sinusoidal_embedding(static_cast<double>(k), c);
  std::vector<double> emb_pre(c);
  std::vector<double> emb(c);
  for (std::size_t i = 0; i < c; ++i) {
    double pre = p[embed_b_][i];
    for (std::size_t j = 0; j < c; ++j) {
      pre += p[embed_w_].at(i, j) * sinusoid[j];
    }
    emb_pre[i] = pre;
    emb[i] = L::silu(pre);
  }

  Tensor input = concat_time(x, y_k);
  Tensor h = L::conv1x1_forward(input, p[in_w_], p[in_b_]);

  std::vector<BlockCache> block_caches;
  auto run_block = [&](const BlockSlots & s) {
    BlockCache * bc = nullptr;
    if (cache != nullptr) {
      bc = &block_caches.emplace_back();
    }
    h = residual_block_forward(h, emb, a_hat, weights(p, s), options, bc);
  };

  std::vector<Tensor> skips(unet_levels_);
  for (std::size_t l = 0; l < unet_levels_; ++l) {
    for (const auto & s : levels_[l].down_blocks) {
      run_block(s);
    }
    skips[l] = h;
    h = L::downsample_forward(h, p[levels_[l].down_w], p[levels_[l].down_b]);
  }
  for (const auto & s : mid_blocks_) {
    run_block(s);
  }
  std::vector<std::size_t> up_lengths(unet_levels_);
  std::vector<Tensor> fuse_inputs(unet_levels_);
  for (std::size_t l = unet_levels_; l-- > 0;) {
    up_lengths[l] = h.dim(2);
    Tensor cat = L::concat_channels(L::upsample_forward(h, lengths_[l]), skips[l]);
    h = L::conv1x1_forward(cat, p[levels_[l].fuse_w], p[levels_[l].fuse_b]);
    if (cache != nullptr) {
      fuse_inputs[l] = std::move(cat);
    }
    for (const auto & s : levels_[l].up_blocks) {
      run_block(s);
    }
  }
  // Scaling the head input by 1/sqrt(C) keeps the output layer's curvature,
  // and so the stable SGD step size, independent of the channel count.
  const double head_scale = 1.0 / std::sqrt(static_cast<double>(config_.channels));
  for (auto & v : h.values()) {
    v *= head_scale;
  }
  Tensor head = L::conv1x1_forward(h, p[out_w_], p[out_b_]);
  Tensor out = L::time_fc_forward(head, p[fc_w_], p[fc_b_]);

  if (cache != nullptr) {
    cache->a_hat = a_hat;
    cache->input = std::move(input);
    cache->sinusoid = std::move(sinusoid);
    cache->emb_pre = std::move(emb_pre);
    cache->emb = std::move(emb);
    cache->blocks = std::move(block_caches);
    cache->skips = std::move(skips);
    cache->up_input_lengths = std::move(up_lengths);
    cache->fuse_inputs = std::move(fuse_inputs);
    cache->head_input = std::move(h);
    cache->head_output = std::move(head);
  }
  return out;
}

void TrajUGnet::backward(
  const ParamSet & p, const ForwardCache & cache, const Tensor & d_out, ParamSet & g) const
{
  const std::size_t c = config_.channels;
  const BlockOptions options = block_options();
  std::vector<double> d_emb(c, 0.0);
  std::size_t block_index = cache.blocks.size();

  Tensor d_h = L::time_fc_backward(cache.head_output, p[fc_w_], d_out, g[fc_w_], g[fc_b_]);
  d_h = L::conv1x1_backward(cache.head_input, p[out_w_], d_h, g[out_w_], g[out_b_]);
  const double head_scale = 1.0 / std::sqrt(static_cast<double>(c));
  for (auto & v : d_h.values()) {
    v *= head_scale;
  }

  auto back_block = [&](const BlockSlots & s) {
    const BlockCache & bc = cache.blocks.at(--block_index);
    ResidualBlockGrads grads{g[s.gain], g[s.bias], g[s.emb_w], g[s.emb_b], g[s.mix_w], g[s.mix_b]};
    d_h = residual_block_backward(
      bc, cache.emb, cache.a_hat, weights(p, s), options, d_h, grads, d_emb);
  };

  std::vector<Tensor> d_skips(unet_levels_);
  for (std::size_t l = 0; l < unet_levels_; ++l) {
    const Level & level = levels_[l];
    for (auto it = level.up_blocks.rbegin(); it != level.up_blocks.rend(); ++it) {
      back_block(*it);
    }
    const Tensor d_cat =
      L::conv1x1_backward(cache.fuse_inputs[l], p[level.fuse_w], d_h, g[level.fuse_w], g[level.fuse_b]);
    Tensor d_up;
    L::split_channels(d_cat, d_cat.dim(0) - cache.skips[l].dim(0), d_up, d_skips[l]);
    d_h = L::upsample_backward(d_up, cache.up_input_lengths[l]);
  }
  for (auto it = mid_blocks_.rbegin(); it != mid_blocks_.rend(); ++it) {
    back_block(*it);
  }
  for (std::size_t l = unet_levels_; l-- > 0;) {
    const Level & level = levels_[l];
    d_h = L::downsample_backward(cache.skips[l], p[level.down_w], d_h, g[level.down_w], g[level.down_b]);
    for (std::size_t i = 0; i < d_h.size(); ++i) {
      d_h[i] += d_skips[l][i];
    }
    for (auto it = level.down_blocks.rbegin(); it != level.down_blocks.rend(); ++it) {
      back_block(*it);
    }
  }
  L::conv1x1_backward(cache.input, p[in_w_], d_h, g[in_w_], g[in_b_]);

  for (std::size_t i = 0; i < c; ++i) {
    const double d_pre = d_emb[i] * L::silu_grad(cache.emb_pre[i]);
    g[embed_b_][i] += d_pre;
    for (std::size_t j = 0; j < c; ++j) {
      g[embed_w_].at(i, j) += d_pre * cache.sinusoid[j];
    }
  }
}

}  // namespace vesselcast
