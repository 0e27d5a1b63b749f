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
#include "oracles.hpp"
#include "test_support.hpp"

#include "vesselcast/graph.hpp"
#include "vesselcast/scene.hpp"

#include <Eigen/Eigenvalues>

namespace vesselcast
{
namespace
{

Tensor random_positions(std::size_t v, std::size_t t, Rng & rng, double spread)
{
  return test::random_tensor({2, v, t}, rng, spread);
}

TEST(EdgeWeight, ReciprocalInsideBoundary)
{
  EXPECT_DOUBLE_EQ(edge_weight({0, 0}, {3, 4}, 50.0), 0.2);
  EXPECT_EQ(edge_weight({0, 0}, {30, 40}, 50.0), 0.0);  // d == tau is outside
  EXPECT_EQ(edge_weight({1, 1}, {1, 1}, 50.0), 0.0);    // coincident
  EXPECT_DOUBLE_EQ(edge_weight({0, 0}, {300, 400}, std::nullopt), 1.0 / 500.0);
  EXPECT_THROW(edge_weight({0, 0}, {1, 1}, 0.0), std::invalid_argument);
}

TEST(Adjacency, MatchesBruteForce)
{
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t v = 1 + static_cast<std::size_t>(rng.uniform_int(0, 5));
    const Tensor x = random_positions(v, 4, rng, 20.0);
    for (const InteractionBoundary tau : {InteractionBoundary{10.0}, InteractionBoundary{}}) {
      const DynamicAdjacency adj = build_adjacency(x, tau);
      const auto ref = oracle::adjacency(x, tau);
      for (std::size_t t = 0; t < 4; ++t) {
        for (std::size_t i = 0; i < v; ++i) {
          for (std::size_t j = 0; j < v; ++j) {
            ASSERT_DOUBLE_EQ(adj.a.at(t, i, j), ref[t](i, j));
          }
        }
      }
    }
  }
}

TEST(Adjacency, NormalizedMatchesMatrixFormula)
{
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t v = 2 + static_cast<std::size_t>(rng.uniform_int(0, 4));
    const Tensor x = random_positions(v, 3, rng, 10.0);
    const auto a_hat = normalize_adjacency(build_adjacency(x, 8.0)).a_hat;
    const auto ref = oracle::adjacency(x, 8.0);
    for (std::size_t t = 0; t < 3; ++t) {
      const Eigen::MatrixXd n = oracle::normalized(ref[t]);
      for (std::size_t i = 0; i < v; ++i) {
        for (std::size_t j = 0; j < v; ++j) {
          ASSERT_NEAR(a_hat.at(t, i, j), n(i, j), 1e-12);
        }
      }
    }
  }
}

TEST(Adjacency, SpectrumInZeroTwo)
{
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t v = 2 + static_cast<std::size_t>(rng.uniform_int(0, 4));
    const Tensor a_hat = scene_graph(random_positions(v, 2, rng, 15.0), 20.0);
    for (std::size_t t = 0; t < 2; ++t) {
      Eigen::MatrixXd m(v, v);
      for (std::size_t i = 0; i < v; ++i) {
        for (std::size_t j = 0; j < v; ++j) {
          m(i, j) = a_hat.at(t, i, j);
        }
      }
      ASSERT_EQ((m - m.transpose()).cwiseAbs().maxCoeff(), 0.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9);
      EXPECT_LE(es.eigenvalues().maxCoeff(), 2.0 + 1e-9);
    }
  }
}

TEST(Adjacency, SqrtDegreeVectorIsInKernel)
{
  Rng rng(4);
  const Tensor x = random_positions(5, 1, rng, 5.0);
  const auto adj = build_adjacency(x, 100.0);
  const Tensor a_hat = normalize_adjacency(adj).a_hat;
  std::vector<double> s(5);
  for (std::size_t i = 0; i < 5; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
      d += adj.a.at(0, i, j);
    }
    s[i] = std::sqrt(d);
  }
  for (std::size_t i = 0; i < 5; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
      acc += a_hat.at(0, i, j) * s[j];
    }
    EXPECT_NEAR(acc, 0.0, 1e-9);
  }
}

TEST(Adjacency, IsolatedVesselGetsIdentityRow)
{
  Tensor x({2, 3, 1}, {0.0, 1.0, 500.0, 0.0, 0.0, 0.0});
  const Tensor a_hat = scene_graph(x, 50.0);
  EXPECT_EQ(a_hat.at(0, 2, 2), 1.0);
  EXPECT_EQ(a_hat.at(0, 2, 0), 0.0);
  EXPECT_EQ(a_hat.at(0, 0, 2), 0.0);
  // Two connected vessels: [[1, -1], [-1, 1]].
  EXPECT_DOUBLE_EQ(a_hat.at(0, 0, 1), -1.0);
  EXPECT_DOUBLE_EQ(a_hat.at(0, 0, 0), 1.0);
}

TEST(Adjacency, SingleVesselIsIdentity)
{
  Rng rng(5);
  const Tensor a_hat = scene_graph(random_positions(1, 4, rng, 5.0));
  for (std::size_t t = 0; t < 4; ++t) {
    EXPECT_EQ(a_hat.at(t, 0, 0), 1.0);
  }
}

TEST(Adjacency, RejectsBadShape)
{
  EXPECT_THROW(build_adjacency(Tensor({3, 2, 2})), ShapeError);
}

TEST(Adjacency, PermutationCommutes)
{
  Rng rng(6);
  const Tensor x = random_positions(4, 3, rng, 6.0);
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  Tensor xp(x.shape());
  for (std::size_t f = 0; f < 2; ++f) {
    for (std::size_t v = 0; v < 4; ++v) {
      for (std::size_t t = 0; t < 3; ++t) {
        xp.at(f, v, t) = x.at(f, perm[v], t);
      }
    }
  }
  const Tensor a = scene_graph(x, 10.0);
  const Tensor ap = scene_graph(xp, 10.0);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_DOUBLE_EQ(ap.at(t, i, j), a.at(t, perm[i], perm[j]));
      }
    }
  }
}

}  // namespace
}  // namespace vesselcast
