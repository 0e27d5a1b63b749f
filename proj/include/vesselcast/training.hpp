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
#ifndef VESSELCAST__TRAINING_HPP_
#define VESSELCAST__TRAINING_HPP_

#include "vesselcast/denoiser.hpp"
#include "vesselcast/diffusion.hpp"
#include "vesselcast/graph.hpp"
#include "vesselcast/scene.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vesselcast
{

struct TrainConfig
{
  std::size_t batch_size = 256;
  std::size_t epochs = 100;
  double lr_init = 0.05;
  double lr_peak = 0.2;
  std::optional<double> lr_final;  // defaults to lr_init / 10
  double warmup_fraction = 0.3;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
  double final_lr() const { return lr_final.value_or(lr_init / 10.0); }

  bool operator==(const TrainConfig &) const = default;
};

/// Linear warm-up from lr_init to lr_peak over the first warmup_fraction of
/// the steps, then cosine decay reaching lr_final at step total_steps - 1.
double one_cycle_lr(
  std::size_t step, std::size_t total_steps, double lr_init = 0.05, double lr_peak = 0.2,
  std::optional<double> lr_final = std::nullopt, double warmup_fraction = 0.3);

/// A scene prepared for training. x and y0 are offsets from each vessel's
/// last observed point divided by the position scale; a_hat comes from the
/// absolute positions.
struct TrainingExample
{
  std::string id;
  Tensor x;
  Tensor y0;
  Tensor a_hat;
};

std::vector<TrainingExample> prepare_examples(
  const std::vector<Scene> & scenes, InteractionBoundary tau, double position_scale = 1.0);

/// Root mean square of the future offsets over all scenes (1 when they
/// are all zero).
double auto_position_scale(const std::vector<Scene> & scenes);

struct NoiseDraw
{
  int k = 1;
  Tensor eps;
};

/// Mean squared noise-prediction error over all elements of the batch and,
/// when \p grad is given, its gradient (grad is overwritten). Results do not
/// depend on \p threads.
double batch_loss(
  const TrajUGnet & net, const ParamSet & params, const NoiseSchedule & schedule,
  std::span<const TrainingExample * const> batch, std::span<const NoiseDraw> draws,
  ParamSet * grad, int threads = 1);

/// params -= lr * grad
void sgd_step(ParamSet & params, const ParamSet & grad, double lr);

struct Checkpoint
{
  int version = 1;
  ParamSet params;
  DenoiserConfig denoiser;
  TrainConfig training;
  int steps = 100;
  double beta_first = 1e-4;
  double beta_last = 0.05;
  InteractionBoundary tau = kDefaultTau;
  ReverseDenominator denominator = ReverseDenominator::kCumulative;
  double position_scale = 1.0;
  std::uint64_t step = 0;
  std::string rng_state;
  std::string config_hash;
  std::string data_hash;
  /// Free-form run configuration echoed into the file.
  nlohmann::json run_config = nlohmann::json::object();

  NoiseSchedule schedule() const { return make_noise_schedule(steps, beta_first, beta_last); }
};

inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

nlohmann::json checkpoint_to_json(const Checkpoint & ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json & j);
void save_checkpoint(const Checkpoint & ckpt, const std::filesystem::path & path);
/// Throws CheckpointError("corrupt checkpoint ...") for unreadable or
/// malformed files and for version mismatches.
Checkpoint load_checkpoint(const std::filesystem::path & path);

nlohmann::json denoiser_config_to_json(const DenoiserConfig & c);
nlohmann::json train_config_to_json(const TrainConfig & c);
nlohmann::json tau_to_json(InteractionBoundary tau);
InteractionBoundary tau_from_json(const nlohmann::json & j);

struct EpochLog
{
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double lr_last = 0.0;
};

nlohmann::json epoch_log_to_json(const EpochLog & log);

struct TrainResult
{
  Checkpoint checkpoint;
  std::vector<EpochLog> log;
};

/// Non-finite loss during training; carries the last finite checkpoint.
class TrainingDiverged : public NumericalError
{
public:
  TrainingDiverged(const std::string & what, Checkpoint last_good)
  : NumericalError(what), last_good_(std::move(last_good))
  {
  }
  const Checkpoint & last_good() const { return last_good_; }

private:
  Checkpoint last_good_;
};

struct TrainSetup
{
  DenoiserConfig denoiser;
  TrainConfig training;
  int steps = 100;
  double beta_first = 1e-4;
  double beta_last = 0.05;
  InteractionBoundary tau = kDefaultTau;
  ReverseDenominator denominator = ReverseDenominator::kCumulative;
  /// Hectometres per model unit; unset derives it from the training scenes.
  std::optional<double> position_scale;
};

using EpochCallback = std::function<void(const EpochLog &)>;

/// Scenes are ordered by id before the seeded shuffle, so the result does
/// not depend on the input order. Each batch draws k ~ U{1..K} and
/// eps ~ N(0, I) per element and applies one SGD update at the current
/// one-cycle learning rate. A dataset smaller than the batch is cycled to
/// fill it, every copy with its own draws.
TrainResult train(
  const std::vector<Scene> & scenes, const TrainSetup & setup,
  const EpochCallback & on_epoch = {});

/// Same as train() but starting from the given parameters.
TrainResult train_from(
  const std::vector<Scene> & scenes, const TrainSetup & setup, ParamSet initial,
  const EpochCallback & on_epoch = {});

/// Throws std::invalid_argument naming the first of features, t_obs or
/// t_pred on which the scene and the checkpoint disagree.
void check_compatible(const Checkpoint & ckpt, const Scene & scene);

/// Samples n futures for \p scene in absolute scene coordinates.
SamplingResult forecast_scene(
  const Checkpoint & ckpt, const TrajUGnet & net, const Scene & scene, std::size_t n_samples,
  Rng & rng, int threads = 1);

}  // namespace vesselcast

#endif  // VESSELCAST__TRAINING_HPP_
