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
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include "vesselcast/denoiser.hpp"
#include "vesselcast/graph.hpp"

#include <cmath>
#include <numeric>

namespace vesselcast
{
namespace
{

double max_relative(const Tensor & a, const Tensor & ref)
{
  double scale = 0.0;
  for (double v : ref.values()) {
    scale = std::max(scale, std::abs(v));
  }
  return max_abs_diff(a, ref) / std::max(scale, 1e-300);
}

Tensor identity_stack(std::size_t t_obs, std::size_t v)
{
  Tensor a({t_obs, v, v});
  for (std::size_t t = 0; t < t_obs; ++t) {
    for (std::size_t i = 0; i < v; ++i) {
      a.at(t, i, i) = 1.0;
    }
  }
  return a;
}

Tensor delta_theta(std::size_t c, std::size_t t_obs)
{
  Tensor theta({c, c, t_obs});
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t h = 0; h < t_obs; ++h) {
      theta.at(i, i, h) = 1.0 / static_cast<double>(t_obs);
    }
  }
  return theta;
}

ParamSet perturbed_params(const TrajUGnet & net, Rng & rng, double scale = 0.3)
{
  ParamSet p = net.init_params(rng);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (auto & v : p[i].values()) {
      v += scale * rng.normal();
    }
  }
  return p;
}

TEST(StepEmbedding, RawSinusoidAtZeroAlternates)
{
  const auto e = sinusoidal_embedding(0.0, 8);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(e[i], i % 2 == 0 ? 0.0 : 1.0);
  }
}

TEST(StepEmbedding, RawSinusoidFormula)
{
  const auto e = sinusoidal_embedding(7.0, 6);
  for (std::size_t i = 0; i < 3; ++i) {
    const double freq = std::pow(10000.0, -2.0 * static_cast<double>(i) / 6.0);
    EXPECT_NEAR(e[2 * i], std::sin(7.0 * freq), 1e-15);
    EXPECT_NEAR(e[2 * i + 1], std::cos(7.0 * freq), 1e-15);
  }
}

TEST(StepEmbedding, DistinctForEveryStep)
{
  DenoiserConfig c;
  c.channels = 8;
  const TrajUGnet net(c);
  Rng rng(1);
  const ParamSet p = net.init_params(rng);
  std::vector<std::vector<double>> table;
  for (int k = 1; k <= 100; ++k) {
    table.push_back(net.step_embedding(p, k));
    EXPECT_EQ(table.back(), net.step_embedding(p, k));
  }
  for (std::size_t a = 0; a < table.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < table[a].size(); ++i) {
        d2 += (table[a][i] - table[b][i]) * (table[a][i] - table[b][i]);
      }
      ASSERT_GT(std::sqrt(d2), std::numeric_limits<double>::epsilon()) << a << " vs " << b;
    }
  }
}

TEST(DynamicGraphConv, MatchesLoopOracle)
{
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = static_cast<std::size_t>(rng.uniform_int(1, 6));
    const auto v = static_cast<std::size_t>(rng.uniform_int(1, 6));
    const auto t = static_cast<std::size_t>(rng.uniform_int(1, 6));
    const auto t_obs = static_cast<std::size_t>(rng.uniform_int(1, 6));
    const bool residual = trial % 3 != 0;
    const std::size_t c_out = residual ? c : static_cast<std::size_t>(rng.uniform_int(1, 6));
    const Tensor h = test::random_tensor({c, v, t}, rng);
    const Tensor a_hat = scene_graph(test::random_tensor({2, v, t_obs}, rng, 5.0), 6.0);
    const Tensor theta = test::random_tensor({c, c_out, t_obs}, rng);
    const Tensor b = test::random_tensor({c_out}, rng);
    const Tensor ref = oracle::dynamic_graph_conv(h, a_hat, theta, b, residual);
    ASSERT_LE(max_relative(dynamic_graph_conv(h, a_hat, theta, b, residual), ref), 1e-12);
  }
}

TEST(DynamicGraphConv, DeltaThetaWithIdentityGraphDoubles)
{
  Rng rng(3);
  const Tensor h = test::random_tensor({3, 4, 5}, rng);
  const Tensor out =
    dynamic_graph_conv(h, identity_stack(10, 4), delta_theta(3, 10), Tensor({3}), true);
  for (std::size_t i = 0; i < h.size(); ++i) {
    EXPECT_NEAR(out[i], std::max(0.0, 2.0 * h[i]), 1e-14);
  }
}

TEST(DynamicGraphConv, IsolatedVesselIsLocal)
{
  Rng rng(4);
  Tensor pos({2, 3, 2});
  pos.at(0, 1, 0) = pos.at(0, 1, 1) = 1.0;
  pos.at(0, 2, 0) = pos.at(0, 2, 1) = 200.0;  // far outside the boundary
  const Tensor a_hat = scene_graph(pos, 50.0);
  const Tensor theta = test::random_tensor({2, 2, 2}, rng);
  const Tensor b = test::random_tensor({2}, rng);
  Tensor h = test::random_tensor({2, 3, 4}, rng);
  const Tensor before = dynamic_graph_conv(h, a_hat, theta, b);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t t = 0; t < 4; ++t) {
      h.at(c, 0, t) += 5.0;
      h.at(c, 1, t) -= 3.0;
    }
  }
  const Tensor after = dynamic_graph_conv(h, a_hat, theta, b);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t t = 0; t < 4; ++t) {
      EXPECT_EQ(after.at(c, 2, t), before.at(c, 2, t));
    }
  }
}

TEST(DynamicGraphConv, RejectsShapeMismatch)
{
  EXPECT_THROW(
    dynamic_graph_conv(Tensor({2, 3, 4}), Tensor({5, 2, 2}), Tensor({2, 2, 5}), Tensor({2})),
    ShapeError);
  EXPECT_THROW(
    dynamic_graph_conv(Tensor({2, 3, 4}), Tensor({5, 3, 3}), Tensor({2, 3, 5}), Tensor({3})),
    ShapeError);
}

struct BlockFixture
{
  std::size_t c = 3;
  Tensor gain{Tensor({3}, 1.0)};
  Tensor bias{Tensor({3})};
  Tensor emb_w;
  Tensor emb_b{Tensor({3})};
  Tensor mix_w;
  Tensor mix_b{Tensor({3})};
  std::vector<double> emb{0.4, -0.2, 0.9};
};

// Per-channel standardization over (V, T) plus the projected embedding.
Tensor expected_h_hat(const Tensor & h, const BlockFixture & f)
{
  Tensor out(h.shape());
  const std::size_t plane = h.dim(1) * h.dim(2);
  for (std::size_t c = 0; c < h.dim(0); ++c) {
    double mean = 0.0;
    for (std::size_t p = 0; p < plane; ++p) {
      mean += h[c * plane + p];
    }
    mean /= static_cast<double>(plane);
    double var = 0.0;
    for (std::size_t p = 0; p < plane; ++p) {
      var += (h[c * plane + p] - mean) * (h[c * plane + p] - mean);
    }
    var /= static_cast<double>(plane);
    double add = f.emb_b[c];
    for (std::size_t j = 0; j < f.emb.size(); ++j) {
      add += f.emb_w.at(c, j) * f.emb[j];
    }
    for (std::size_t p = 0; p < plane; ++p) {
      out[c * plane + p] = (h[c * plane + p] - mean) / std::sqrt(var + layers::kNormEpsilon) + add;
    }
  }
  return out;
}

TEST(ResidualBlock, AblatedBlockIsReluOfNormalizedInput)
{
  Rng rng(5);
  BlockFixture f;
  f.emb_w = test::random_tensor({3, 3}, rng);
  f.mix_w = Tensor({3, 3});
  for (std::size_t i = 0; i < 3; ++i) {
    f.mix_w.at(i, i) = 1.0;
  }
  const Tensor h = test::random_tensor({3, 2, 5}, rng, 2.0);
  const ResidualBlockWeights w{f.gain, f.bias, f.emb_w, f.emb_b, f.mix_w, f.mix_b};
  const Tensor out =
    residual_block_forward(h, f.emb, identity_stack(4, 2), w, BlockOptions{false, false});
  const Tensor h_hat = expected_h_hat(h, f);
  for (std::size_t i = 0; i < h.size(); ++i) {
    EXPECT_NEAR(out[i], std::max(0.0, h_hat[i]), 1e-12);
  }
}

TEST(ResidualBlock, FullBlockWithDeltaThetaDoubles)
{
  Rng rng(6);
  BlockFixture f;
  f.emb_w = test::random_tensor({3, 3}, rng);
  f.mix_w = delta_theta(3, 4);
  const Tensor h = test::random_tensor({3, 2, 5}, rng, 2.0);
  const ResidualBlockWeights w{f.gain, f.bias, f.emb_w, f.emb_b, f.mix_w, f.mix_b};
  const Tensor out = residual_block_forward(h, f.emb, identity_stack(4, 2), w, BlockOptions{});
  const Tensor h_hat = expected_h_hat(h, f);
  for (std::size_t i = 0; i < h.size(); ++i) {
    EXPECT_NEAR(out[i], std::max(0.0, 2.0 * h_hat[i]), 1e-12);
  }
}

TEST(TrajUGnet, OutputDependsOnStep)
{
  DenoiserConfig c;
  c.channels = 4;
  c.levels = 1;
  const TrajUGnet net(c);
  Rng rng(7);
  const ParamSet p = perturbed_params(net, rng);
  const Tensor x = test::random_tensor({2, 2, 10}, rng);
  const Tensor y = test::random_tensor({2, 2, 15}, rng);
  const Tensor a_hat = scene_graph(x);
  EXPECT_NE(net.forward(p, y, 3, x, a_hat), net.forward(p, y, 4, x, a_hat));
  EXPECT_EQ(net.forward(p, y, 3, x, a_hat), net.forward(p, y, 3, x, a_hat));
}

TEST(TrajUGnet, OutputShapeForAnyVesselCount)
{
  const TrajUGnet net{DenoiserConfig{}};
  Rng rng(8);
  const ParamSet p = perturbed_params(net, rng, 0.05);
  for (std::size_t v = 1; v <= 5; ++v) {
    const Tensor x = test::random_tensor({2, v, 10}, rng, 10.0);
    const Tensor out =
      net.forward(p, test::random_tensor({2, v, 15}, rng), 50, x, scene_graph(x));
    EXPECT_EQ(out.shape(), (Shape{2, v, 15}));
    EXPECT_TRUE(out.all_finite());
  }
}

TEST(TrajUGnet, FreshInitPredictsZero)
{
  const TrajUGnet net{DenoiserConfig{}};
  Rng rng(9);
  const ParamSet p = net.init_params(rng);
  const Tensor x = test::random_tensor({2, 3, 10}, rng, 10.0);
  const Tensor out = net.forward(p, test::random_tensor({2, 3, 15}, rng), 17, x, scene_graph(x));
  for (double v : out.values()) {
    EXPECT_EQ(v, 0.0);
  }
}

TEST(TrajUGnet, RejectsBadConfigAndInputs)
{
  DenoiserConfig c;
  c.channels = 0;
  EXPECT_THROW(TrajUGnet{c}, std::invalid_argument);
  c = DenoiserConfig{};
  c.t_pred = 0;
  EXPECT_THROW(TrajUGnet{c}, std::invalid_argument);
  const TrajUGnet net{DenoiserConfig{}};
  Rng rng(10);
  const ParamSet p = net.init_params(rng);
  EXPECT_THROW(net.forward(p, Tensor({2, 3, 14}), 1, Tensor({2, 3, 10}), Tensor({10, 3, 3})),
               ShapeError);
  EXPECT_THROW(net.forward(p, Tensor({2, 3, 15}), 1, Tensor({2, 3, 10}), Tensor({10, 2, 2})),
               ShapeError);
}

TEST(TrajUGnet, PermutationEquivariant)
{
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    DenoiserConfig c;
    c.channels = 4;
    c.levels = static_cast<std::size_t>(trial % 3);
    c.t_obs = 5;
    c.t_pred = 4;
    c.disable_dgc = trial % 5 == 4;
    const TrajUGnet net(c);
    const ParamSet p = perturbed_params(net, rng);
    const auto v = static_cast<std::size_t>(rng.uniform_int(2, 5));
    const Tensor x = test::random_tensor({2, v, 5}, rng, 4.0);
    const Tensor y = test::random_tensor({2, v, 4}, rng);
    std::vector<std::size_t> perm(v);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    auto permute = [&](const Tensor & t) {
      Tensor out(t.shape());
      for (std::size_t f = 0; f < t.dim(0); ++f) {
        for (std::size_t i = 0; i < v; ++i) {
          for (std::size_t s = 0; s < t.dim(2); ++s) {
            out.at(f, i, s) = t.at(f, perm[i], s);
          }
        }
      }
      return out;
    };
    const int k = rng.uniform_int(1, 100);
    const Tensor base = net.forward(p, y, k, x, scene_graph(x));
    const Tensor xp = permute(x);
    const Tensor moved = net.forward(p, permute(y), k, xp, scene_graph(xp));
    EXPECT_LE(max_relative(moved, permute(base)), 1e-10);
  }
}

struct Variant
{
  const char * name;
  std::size_t levels;
  bool unet;
  bool dgc;
  bool residual;
};

class GradientCheck : public ::testing::TestWithParam<Variant>
{
};

TEST_P(GradientCheck, MatchesCentralDifferences)
{
  const Variant variant = GetParam();
  DenoiserConfig c;
  c.channels = 4;
  c.levels = variant.levels;
  c.t_obs = 4;
  c.t_pred = 3;
  c.disable_unet = !variant.unet;
  c.disable_dgc = !variant.dgc;
  c.disable_residual = !variant.residual;
  const TrajUGnet net(c);
  for (std::uint64_t seed : {12, 13, 14}) {
    Rng rng(seed);
    // Moderate perturbation: far from the structured init, yet small enough
    // that a +-1e-5 step rarely straddles a ReLU kink.
    ParamSet p = perturbed_params(net, rng, 0.1);
    const Tensor x = test::random_tensor({2, 2, 4}, rng, 3.0);
    const Tensor a_hat = scene_graph(x);
    const Tensor y = test::random_tensor({2, 2, 3}, rng);
    const Tensor eps = test::random_tensor({2, 2, 3}, rng);
    const int k = rng.uniform_int(1, 100);
    auto loss = [&]() {
      const Tensor out = net.forward(p, y, k, x, a_hat);
      double acc = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) {
        acc += (out[i] - eps[i]) * (out[i] - eps[i]);
      }
      return acc / static_cast<double>(out.size());
    };
    ForwardCache cache;
    const Tensor out = net.forward(p, y, k, x, a_hat, &cache);
    Tensor d_out(out.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
      d_out[i] = 2.0 * (out[i] - eps[i]) / static_cast<double>(out.size());
    }
    ParamSet grads = p.zeros_like();
    net.backward(p, cache, d_out, grads);
    const auto result = test::check_gradients(p, grads, loss);
    EXPECT_LT(result.worst, 1e-4) << "seed " << seed << " worst tensor " << result.where;
  }
}

INSTANTIATE_TEST_SUITE_P(
  Variants, GradientCheck,
  ::testing::Values(
    Variant{"full_one_level", 1, true, true, true}, Variant{"full_two_levels", 2, true, true, true},
    Variant{"no_unet", 1, false, true, true}, Variant{"no_dgc", 1, true, false, true},
    Variant{"no_residual", 1, true, true, false}, Variant{"all_off", 1, false, false, false}),
  [](const ::testing::TestParamInfo<Variant> & info) { return std::string(info.param.name); });

}  // namespace
}  // namespace vesselcast
