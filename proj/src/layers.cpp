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
#include "vesselcast/layers.hpp"

#include <algorithm>
#include <cmath>

namespace vesselcast::layers
{

namespace
{

void require_rank3(const Tensor & t, const char * what)
{
  if (t.rank() != 3) {
    throw ShapeError(std::string(what) + ": expected a C x V x T tensor, got " +
                     shape_to_string(t.shape()));
  }
}

}  // namespace

Tensor conv1x1_forward(const Tensor & in, const Tensor & w, const Tensor & b)
{
  require_rank3(in, "conv1x1");
  const std::size_t c_in = in.dim(0);
  const std::size_t c_out = w.dim(0);
  if (w.dim(1) != c_in || b.size() != c_out) {
    throw ShapeError("conv1x1: weight " + shape_to_string(w.shape()) + " does not match input " +
                     shape_to_string(in.shape()));
  }
  const std::size_t plane = in.dim(1) * in.dim(2);
  Tensor out({c_out, in.dim(1), in.dim(2)});
  for (std::size_t o = 0; o < c_out; ++o) {
    double * dst = out.data() + o * plane;
    for (std::size_t p = 0; p < plane; ++p) {
      dst[p] = b[o];
    }
    for (std::size_t i = 0; i < c_in; ++i) {
      const double wi = w.at(o, i);
      const double * src = in.data() + i * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        dst[p] += wi * src[p];
      }
    }
  }
  return out;
}

Tensor conv1x1_backward(
  const Tensor & in, const Tensor & w, const Tensor & d_out, Tensor & d_w, Tensor & d_b)
{
  const std::size_t c_in = in.dim(0);
  const std::size_t c_out = w.dim(0);
  const std::size_t plane = in.dim(1) * in.dim(2);
  Tensor d_in(in.shape());
  for (std::size_t o = 0; o < c_out; ++o) {
    const double * g = d_out.data() + o * plane;
    double gb = 0.0;
    for (std::size_t p = 0; p < plane; ++p) {
      gb += g[p];
    }
    d_b[o] += gb;
    for (std::size_t i = 0; i < c_in; ++i) {
      const double * src = in.data() + i * plane;
      double * di = d_in.data() + i * plane;
      const double wi = w.at(o, i);
      double gw = 0.0;
      for (std::size_t p = 0; p < plane; ++p) {
        gw += g[p] * src[p];
        di[p] += wi * g[p];
      }
      d_w.at(o, i) += gw;
    }
  }
  return d_in;
}

Tensor downsample_forward(const Tensor & in, const Tensor & w, const Tensor & b)
{
  require_rank3(in, "downsample");
  const std::size_t c_in = in.dim(0);
  const std::size_t v_count = in.dim(1);
  const std::size_t t_in = in.dim(2);
  const std::size_t c_out = w.dim(0);
  if (w.rank() != 3 || w.dim(1) != c_in || w.dim(2) != 3 || b.size() != c_out) {
    throw ShapeError("downsample: weight " + shape_to_string(w.shape()) +
                     " does not match input " + shape_to_string(in.shape()));
  }
  const std::size_t t_out = (t_in + 1) / 2;
  Tensor out({c_out, v_count, t_out});
  for (std::size_t o = 0; o < c_out; ++o) {
    for (std::size_t v = 0; v < v_count; ++v) {
      for (std::size_t t = 0; t < t_out; ++t) {
        double acc = b[o];
        for (std::size_t i = 0; i < c_in; ++i) {
          const double * src = in.data() + (i * v_count + v) * t_in;
          for (std::size_t k = 0; k < 3; ++k) {
            const auto src_t = static_cast<long long>(2 * t + k) - 1;
            if (src_t >= 0 && src_t < static_cast<long long>(t_in)) {
              acc += w.at(o, i, k) * src[src_t];
            }
          }
        }
        out.at(o, v, t) = acc;
      }
    }
  }
  return out;
}

Tensor downsample_backward(
  const Tensor & in, const Tensor & w, const Tensor & d_out, Tensor & d_w, Tensor & d_b)
{
  const std::size_t c_in = in.dim(0);
  const std::size_t v_count = in.dim(1);
  const std::size_t t_in = in.dim(2);
  const std::size_t c_out = w.dim(0);
  const std::size_t t_out = d_out.dim(2);
  Tensor d_in(in.shape());
  for (std::size_t o = 0; o < c_out; ++o) {
    for (std::size_t v = 0; v < v_count; ++v) {
      for (std::size_t t = 0; t < t_out; ++t) {
        const double g = d_out.at(o, v, t);
        d_b[o] += g;
        for (std::size_t i = 0; i < c_in; ++i) {
          const double * src = in.data() + (i * v_count + v) * t_in;
          double * di = d_in.data() + (i * v_count + v) * t_in;
          for (std::size_t k = 0; k < 3; ++k) {
            const auto src_t = static_cast<long long>(2 * t + k) - 1;
            if (src_t >= 0 && src_t < static_cast<long long>(t_in)) {
              d_w.at(o, i, k) += g * src[src_t];
              di[src_t] += g * w.at(o, i, k);
            }
          }
        }
      }
    }
  }
  return d_in;
}

Tensor upsample_forward(const Tensor & in, std::size_t length)
{
  require_rank3(in, "upsample");
  const std::size_t rows = in.dim(0) * in.dim(1);
  const std::size_t t_in = in.dim(2);
  if (length > 2 * t_in) {
    throw ShapeError("upsample: target length exceeds twice the input length");
  }
  Tensor out({in.dim(0), in.dim(1), length});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t t = 0; t < length; ++t) {
      out[r * length + t] = in[r * t_in + t / 2];
    }
  }
  return out;
}

Tensor upsample_backward(const Tensor & d_out, std::size_t in_length)
{
  const std::size_t rows = d_out.dim(0) * d_out.dim(1);
  const std::size_t length = d_out.dim(2);
  Tensor d_in({d_out.dim(0), d_out.dim(1), in_length});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t t = 0; t < length; ++t) {
      d_in[r * in_length + t / 2] += d_out[r * length + t];
    }
  }
  return d_in;
}

Tensor concat_channels(const Tensor & a, const Tensor & b)
{
  if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2)) {
    throw ShapeError("concat_channels: " + shape_to_string(a.shape()) + " vs " +
                     shape_to_string(b.shape()));
  }
  Tensor out({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
  std::copy(a.storage().begin(), a.storage().end(), out.storage().begin());
  std::copy(b.storage().begin(), b.storage().end(), out.storage().begin() + a.size());
  return out;
}

void split_channels(const Tensor & d_cat, std::size_t first, Tensor & d_a, Tensor & d_b)
{
  const std::size_t plane = d_cat.dim(1) * d_cat.dim(2);
  d_a = Tensor({first, d_cat.dim(1), d_cat.dim(2)});
  d_b = Tensor({d_cat.dim(0) - first, d_cat.dim(1), d_cat.dim(2)});
  std::copy_n(d_cat.data(), first * plane, d_a.data());
  std::copy_n(d_cat.data() + first * plane, d_b.size(), d_b.data());
}

Tensor group_norm_forward(
  const Tensor & in, const Tensor & gain, const Tensor & bias, NormCache * cache)
{
  require_rank3(in, "group_norm");
  const std::size_t channels = in.dim(0);
  const std::size_t plane = in.dim(1) * in.dim(2);
  if (gain.size() != channels || bias.size() != channels) {
    throw ShapeError("group_norm: gain/bias length does not match channels");
  }
  Tensor out(in.shape());
  Tensor normalized(in.shape());
  std::vector<double> inv_std(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    const double * src = in.data() + c * plane;
    double mean = 0.0;
    for (std::size_t p = 0; p < plane; ++p) {
      mean += src[p];
    }
    mean /= static_cast<double>(plane);
    double var = 0.0;
    for (std::size_t p = 0; p < plane; ++p) {
      var += (src[p] - mean) * (src[p] - mean);
    }
    var /= static_cast<double>(plane);
    inv_std[c] = 1.0 / std::sqrt(var + kNormEpsilon);
    for (std::size_t p = 0; p < plane; ++p) {
      const double n = (src[p] - mean) * inv_std[c];
      normalized[c * plane + p] = n;
      out[c * plane + p] = gain[c] * n + bias[c];
    }
  }
  if (cache != nullptr) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

Tensor group_norm_backward(
  const NormCache & cache, const Tensor & gain, const Tensor & d_out, Tensor & d_gain,
  Tensor & d_bias)
{
  const std::size_t channels = d_out.dim(0);
  const std::size_t plane = d_out.dim(1) * d_out.dim(2);
  const auto n = static_cast<double>(plane);
  Tensor d_in(d_out.shape());
  for (std::size_t c = 0; c < channels; ++c) {
    const double * g = d_out.data() + c * plane;
    const double * xh = cache.normalized.data() + c * plane;
    double sum_g = 0.0;
    double sum_gx = 0.0;
    for (std::size_t p = 0; p < plane; ++p) {
      sum_g += g[p];
      sum_gx += g[p] * xh[p];
    }
    d_gain[c] += sum_gx;
    d_bias[c] += sum_g;
    const double scale = gain[c] * cache.inv_std[c] / n;
    double * di = d_in.data() + c * plane;
    for (std::size_t p = 0; p < plane; ++p) {
      di[p] = scale * (n * g[p] - sum_g - xh[p] * sum_gx);
    }
  }
  return d_in;
}

std::vector<Tensor> graph_aggregate(const Tensor & in, const Tensor & a_hat)
{
  require_rank3(in, "graph_aggregate");
  const std::size_t channels = in.dim(0);
  const std::size_t v_count = in.dim(1);
  const std::size_t t_len = in.dim(2);
  if (a_hat.rank() != 3 || a_hat.dim(1) != v_count || a_hat.dim(2) != v_count) {
    throw ShapeError("graph_aggregate: adjacency " + shape_to_string(a_hat.shape()) +
                     " does not match features " + shape_to_string(in.shape()));
  }
  std::vector<Tensor> out;
  out.reserve(a_hat.dim(0));
  for (std::size_t h = 0; h < a_hat.dim(0); ++h) {
    Tensor g({channels, v_count, t_len});
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t v = 0; v < v_count; ++v) {
        double * dst = g.data() + (c * v_count + v) * t_len;
        for (std::size_t u = 0; u < v_count; ++u) {
          const double a = a_hat.at(h, v, u);
          if (a == 0.0) {
            continue;
          }
          const double * src = in.data() + (c * v_count + u) * t_len;
          for (std::size_t t = 0; t < t_len; ++t) {
            dst[t] += a * src[t];
          }
        }
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

Tensor graph_contract(const std::vector<Tensor> & aggregated, const Tensor & theta, const Tensor & b)
{
  const std::size_t c_in = theta.dim(0);
  const std::size_t c_out = theta.dim(1);
  const std::size_t history = theta.dim(2);
  if (aggregated.size() != history || aggregated.empty() || aggregated[0].dim(0) != c_in ||
      b.size() != c_out) {
    throw ShapeError("graph_contract: theta " + shape_to_string(theta.shape()) +
                     " does not match the aggregated features");
  }
  const std::size_t plane = aggregated[0].dim(1) * aggregated[0].dim(2);
  Tensor out({c_out, aggregated[0].dim(1), aggregated[0].dim(2)});
  for (std::size_t o = 0; o < c_out; ++o) {
    double * dst = out.data() + o * plane;
    for (std::size_t p = 0; p < plane; ++p) {
      dst[p] = b[o];
    }
    for (std::size_t h = 0; h < history; ++h) {
      for (std::size_t c = 0; c < c_in; ++c) {
        const double w = theta.at(c, o, h);
        const double * src = aggregated[h].data() + c * plane;
        for (std::size_t p = 0; p < plane; ++p) {
          dst[p] += w * src[p];
        }
      }
    }
  }
  return out;
}

Tensor graph_conv_backward(
  const std::vector<Tensor> & aggregated, const Tensor & a_hat, const Tensor & theta,
  const Tensor & d_gc, Tensor & d_theta, Tensor & d_b)
{
  const std::size_t c_in = theta.dim(0);
  const std::size_t c_out = theta.dim(1);
  const std::size_t history = theta.dim(2);
  const std::size_t v_count = d_gc.dim(1);
  const std::size_t t_len = d_gc.dim(2);
  const std::size_t plane = v_count * t_len;

  for (std::size_t o = 0; o < c_out; ++o) {
    const double * g = d_gc.data() + o * plane;
    double gb = 0.0;
    for (std::size_t p = 0; p < plane; ++p) {
      gb += g[p];
    }
    d_b[o] += gb;
  }
  Tensor d_in({c_in, v_count, t_len});
  Tensor d_agg({c_in, v_count, t_len});
  for (std::size_t h = 0; h < history; ++h) {
    d_agg.fill(0.0);
    for (std::size_t o = 0; o < c_out; ++o) {
      const double * g = d_gc.data() + o * plane;
      for (std::size_t c = 0; c < c_in; ++c) {
        const double * src = aggregated[h].data() + c * plane;
        double * da = d_agg.data() + c * plane;
        const double w = theta.at(c, o, h);
        double gw = 0.0;
        for (std::size_t p = 0; p < plane; ++p) {
          gw += g[p] * src[p];
          da[p] += w * g[p];
        }
        d_theta.at(c, o, h) += gw;
      }
    }
    for (std::size_t c = 0; c < c_in; ++c) {
      for (std::size_t v = 0; v < v_count; ++v) {
        const double * da = d_agg.data() + (c * v_count + v) * t_len;
        for (std::size_t u = 0; u < v_count; ++u) {
          const double a = a_hat.at(h, v, u);
          if (a == 0.0) {
            continue;
          }
          double * di = d_in.data() + (c * v_count + u) * t_len;
          for (std::size_t t = 0; t < t_len; ++t) {
            di[t] += a * da[t];
          }
        }
      }
    }
  }
  return d_in;
}

Tensor time_fc_forward(const Tensor & in, const Tensor & w, const Tensor & b)
{
  require_rank3(in, "time_fc");
  const std::size_t rows = in.dim(0) * in.dim(1);
  const std::size_t t_in = in.dim(2);
  const std::size_t t_out = w.dim(0);
  if (w.dim(1) != t_in || b.size() != t_out) {
    throw ShapeError("time_fc: weight " + shape_to_string(w.shape()) + " does not match input " +
                     shape_to_string(in.shape()));
  }
  Tensor out({in.dim(0), in.dim(1), t_out});
  for (std::size_t r = 0; r < rows; ++r) {
    const double * src = in.data() + r * t_in;
    for (std::size_t s = 0; s < t_out; ++s) {
      double acc = b[s];
      for (std::size_t t = 0; t < t_in; ++t) {
        acc += w.at(s, t) * src[t];
      }
      out[r * t_out + s] = acc;
    }
  }
  return out;
}

Tensor time_fc_backward(
  const Tensor & in, const Tensor & w, const Tensor & d_out, Tensor & d_w, Tensor & d_b)
{
  const std::size_t rows = in.dim(0) * in.dim(1);
  const std::size_t t_in = in.dim(2);
  const std::size_t t_out = w.dim(0);
  Tensor d_in(in.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double * src = in.data() + r * t_in;
    double * di = d_in.data() + r * t_in;
    for (std::size_t s = 0; s < t_out; ++s) {
      const double g = d_out[r * t_out + s];
      d_b[s] += g;
      for (std::size_t t = 0; t < t_in; ++t) {
        d_w.at(s, t) += g * src[t];
        di[t] += g * w.at(s, t);
      }
    }
  }
  return d_in;
}

Tensor relu(const Tensor & in)
{
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = in[i] > 0.0 ? in[i] : 0.0;
  }
  return out;
}

Tensor relu_backward(const Tensor & pre, const Tensor & d_out)
{
  Tensor d(pre.shape());
  for (std::size_t i = 0; i < pre.size(); ++i) {
    d[i] = pre[i] > 0.0 ? d_out[i] : 0.0;
  }
  return d;
}

double silu(double x) { return x / (1.0 + std::exp(-x)); }

double silu_grad(double x)
{
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

}  // namespace vesselcast::layers
