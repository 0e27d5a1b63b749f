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
#ifndef VESSELCAST__DIFFUSION_HPP_
#define VESSELCAST__DIFFUSION_HPP_

#include "vesselcast/rng.hpp"
#include "vesselcast/tensor.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vesselcast
{

/// Non-finite values produced by a network output or a sampling step.
class NumericalError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Linear variance schedule. All accessors take the 1-based step k.
class NoiseSchedule
{
public:
  NoiseSchedule() = default;
  NoiseSchedule(int steps, double beta_first, double beta_last);

  int steps() const { return static_cast<int>(beta_.size()); }
  double beta_first() const { return beta_first_; }
  double beta_last() const { return beta_last_; }

  double beta(int k) const { return beta_.at(index(k)); }
  double alpha(int k) const { return alpha_.at(index(k)); }
  double alpha_bar(int k) const { return alpha_bar_.at(index(k)); }

  const std::vector<double> & betas() const { return beta_; }
  const std::vector<double> & alphas() const { return alpha_; }
  const std::vector<double> & alpha_bars() const { return alpha_bar_; }

private:
  std::size_t index(int k) const;

  double beta_first_ = 0.0;
  double beta_last_ = 0.0;
  std::vector<double> beta_;
  std::vector<double> alpha_;
  std::vector<double> alpha_bar_;
};

NoiseSchedule make_noise_schedule(int steps = 100, double beta_first = 1e-4, double beta_last = 0.05);

/// Which square root divides the noise estimate in the reverse mean:
/// sqrt(1 - alpha_bar_k) (standard) or sqrt(1 - alpha_k) (per-step variant).
enum class ReverseDenominator
{
  kCumulative,
  kPerStep,
};

/// eps_theta(y_k, k, x, A_hat). Implementations must be safe for concurrent
/// const calls.
class NoisePredictor
{
public:
  virtual ~NoisePredictor() = default;
  virtual Tensor predict_noise(
    const Tensor & y_k, int k, const Tensor & x, const Tensor & a_hat) const = 0;
};

/// sqrt(alpha_bar_k) * y0 + sqrt(1 - alpha_bar_k) * eps
Tensor q_sample(const Tensor & y0, int k, const NoiseSchedule & schedule, const Tensor & eps);

struct LossSample
{
  double loss = 0.0;  // mean squared error over elements
  int k = 0;
  Tensor eps;
  Tensor y_k;
  Tensor prediction;
};

/// Draws k ~ U{1..K} and eps ~ N(0, I), noises y0 and scores the predictor.
LossSample training_loss(
  const NoisePredictor & predictor, const Tensor & x, const Tensor & y0, const Tensor & a_hat,
  const NoiseSchedule & schedule, Rng & rng, const std::string & scene_id = {});

/// Mean squared error between the drawn and the predicted noise.
double noise_mse(const Tensor & eps, const Tensor & predicted);

/// Reverse update from a given noise estimate. z is ignored at k = 1.
Tensor reverse_step(
  const Tensor & y_k, int k, const Tensor & eps_hat, const NoiseSchedule & schedule,
  const Tensor & z, ReverseDenominator denominator = ReverseDenominator::kCumulative);

Tensor p_sample_step(
  const Tensor & y_k, int k, const NoisePredictor & predictor, const Tensor & x,
  const Tensor & a_hat, const NoiseSchedule & schedule, const Tensor & z,
  ReverseDenominator denominator = ReverseDenominator::kCumulative);

/// Runs the reverse chain K ... 1 from a generator seeded with \p seed.
Tensor sample_one(
  const NoisePredictor & predictor, const Tensor & x, const Tensor & a_hat, std::size_t t_pred,
  const NoiseSchedule & schedule, std::uint64_t seed,
  ReverseDenominator denominator = ReverseDenominator::kCumulative);

struct SamplingResult
{
  std::vector<Tensor> samples;
  std::vector<std::uint64_t> seeds;       // one per returned sample
  std::vector<std::string> diagnostics;   // one per diverged sample
};

/// Draws one seed per sample from \p rng, then runs sample_one for each;
/// diverged samples are dropped and reported in diagnostics.
SamplingResult sample_trajectories(
  const NoisePredictor & predictor, const Tensor & x, const Tensor & a_hat, std::size_t t_pred,
  const NoiseSchedule & schedule, std::size_t n_samples, Rng & rng,
  ReverseDenominator denominator = ReverseDenominator::kCumulative, int threads = 1);

}  // namespace vesselcast

#endif  // VESSELCAST__DIFFUSION_HPP_
