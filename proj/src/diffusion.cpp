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
#include "vesselcast/diffusion.hpp"

#include "vesselcast/parallel.hpp"

#include <cmath>
#include <optional>

namespace vesselcast
{

NoiseSchedule::NoiseSchedule(int steps, double beta_first, double beta_last)
: beta_first_(beta_first), beta_last_(beta_last)
{
  if (steps < 1) {
    throw std::invalid_argument("noise schedule needs at least one step");
  }
  if (!(beta_first > 0.0) || !(beta_first <= beta_last) || !(beta_last < 1.0)) {
    throw std::invalid_argument("noise schedule requires 0 < beta_1 <= beta_K < 1");
  }
  beta_.resize(static_cast<std::size_t>(steps));
  alpha_.resize(beta_.size());
  alpha_bar_.resize(beta_.size());
  double running = 1.0;
  for (int k = 1; k <= steps; ++k) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(k - 1) / (steps - 1);
    const double beta =
      k == steps && steps > 1 ? beta_last : beta_first + frac * (beta_last - beta_first);
    const auto i = static_cast<std::size_t>(k - 1);
    beta_[i] = beta;
    alpha_[i] = 1.0 - beta;
    running *= alpha_[i];
    alpha_bar_[i] = running;
  }
}

std::size_t NoiseSchedule::index(int k) const
{
  if (k < 1 || k > steps()) {
    throw std::out_of_range("diffusion step " + std::to_string(k) + " outside 1.." +
                            std::to_string(steps()));
  }
  return static_cast<std::size_t>(k - 1);
}

NoiseSchedule make_noise_schedule(int steps, double beta_first, double beta_last)
{
  return NoiseSchedule(steps, beta_first, beta_last);
}

Tensor q_sample(const Tensor & y0, int k, const NoiseSchedule & schedule, const Tensor & eps)
{
  require_same_shape(y0, eps, "q_sample");
  const double ab = schedule.alpha_bar(k);
  return axpby(y0, std::sqrt(ab), eps, std::sqrt(1.0 - ab));
}

double noise_mse(const Tensor & eps, const Tensor & predicted)
{
  require_same_shape(eps, predicted, "noise_mse");
  double s = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double d = eps[i] - predicted[i];
    s += d * d;
  }
  return s / static_cast<double>(eps.size());
}

LossSample training_loss(
  const NoisePredictor & predictor, const Tensor & x, const Tensor & y0, const Tensor & a_hat,
  const NoiseSchedule & schedule, Rng & rng, const std::string & scene_id)
{
  LossSample out;
  out.k = rng.uniform_int(1, schedule.steps());
  out.eps = rng.normal_tensor(y0.shape());
  out.y_k = q_sample(y0, out.k, schedule, out.eps);
  out.prediction = predictor.predict_noise(out.y_k, out.k, x, a_hat);
  require_same_shape(out.prediction, out.eps, "training_loss");
  if (!out.prediction.all_finite()) {
    throw NumericalError("non-finite denoiser output at step " + std::to_string(out.k) +
                         (scene_id.empty() ? "" : " for scene " + scene_id));
  }
  out.loss = noise_mse(out.eps, out.prediction);
  return out;
}

Tensor reverse_step(
  const Tensor & y_k, int k, const Tensor & eps_hat, const NoiseSchedule & schedule,
  const Tensor & z, ReverseDenominator denominator)
{
  require_same_shape(y_k, eps_hat, "reverse_step");
  const double beta = schedule.beta(k);
  const double inv_sqrt_alpha = 1.0 / std::sqrt(schedule.alpha(k));
  const double denom = denominator == ReverseDenominator::kCumulative
                         ? std::sqrt(1.0 - schedule.alpha_bar(k))
                         : std::sqrt(1.0 - schedule.alpha(k));
  const double eps_coeff = beta / denom;
  const double sigma = k > 1 ? std::sqrt(beta) : 0.0;
  if (k > 1) {
    require_same_shape(y_k, z, "reverse_step noise");
  }
  Tensor out(y_k.shape());
  for (std::size_t i = 0; i < y_k.size(); ++i) {
    out[i] = inv_sqrt_alpha * (y_k[i] - eps_coeff * eps_hat[i]) + (k > 1 ? sigma * z[i] : 0.0);
  }
  if (!out.all_finite()) {
    throw NumericalError("non-finite state in reverse step " + std::to_string(k));
  }
  return out;
}

Tensor p_sample_step(
  const Tensor & y_k, int k, const NoisePredictor & predictor, const Tensor & x,
  const Tensor & a_hat, const NoiseSchedule & schedule, const Tensor & z,
  ReverseDenominator denominator)
{
  const Tensor eps_hat = predictor.predict_noise(y_k, k, x, a_hat);
  if (!eps_hat.all_finite()) {
    throw NumericalError("non-finite denoiser output in reverse step " + std::to_string(k));
  }
  return reverse_step(y_k, k, eps_hat, schedule, z, denominator);
}

Tensor sample_one(
  const NoisePredictor & predictor, const Tensor & x, const Tensor & a_hat, std::size_t t_pred,
  const NoiseSchedule & schedule, std::uint64_t seed, ReverseDenominator denominator)
{
  Rng rng(seed);
  Tensor y = rng.normal_tensor({x.dim(0), x.dim(1), t_pred});
  Tensor z(y.shape());
  for (int k = schedule.steps(); k >= 1; --k) {
    if (k > 1) {
      rng.fill_normal(z);
    }
    y = p_sample_step(y, k, predictor, x, a_hat, schedule, z, denominator);
  }
  return y;
}

SamplingResult sample_trajectories(
  const NoisePredictor & predictor, const Tensor & x, const Tensor & a_hat, std::size_t t_pred,
  const NoiseSchedule & schedule, std::size_t n_samples, Rng & rng,
  ReverseDenominator denominator, int threads)
{
  std::vector<std::uint64_t> seeds(n_samples);
  for (auto & s : seeds) {
    s = rng.next_u64();
  }
  std::vector<std::optional<Tensor>> outputs(n_samples);
  std::vector<std::string> errors(n_samples);
  parallel_for(n_samples, threads, [&](std::size_t i) {
    try {
      outputs[i] = sample_one(predictor, x, a_hat, t_pred, schedule, seeds[i], denominator);
    } catch (const NumericalError & e) {
      errors[i] = "sample " + std::to_string(i) + " (seed " + std::to_string(seeds[i]) +
                  ") diverged: " + e.what();
    }
  });
  SamplingResult result;
  for (std::size_t i = 0; i < n_samples; ++i) {
    if (outputs[i]) {
      result.samples.push_back(std::move(*outputs[i]));
      result.seeds.push_back(seeds[i]);
    } else {
      result.diagnostics.push_back(errors[i]);
    }
  }
  return result;
}

}  // namespace vesselcast
