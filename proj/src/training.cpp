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
#include "vesselcast/training.hpp"

#include "vesselcast/frame.hpp"
#include "vesselcast/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace vesselcast
{

namespace
{
constexpr std::size_t kReductionChunks = 8;
}  // namespace

void TrainConfig::validate() const
{
  if (batch_size < 1) {
    throw std::invalid_argument("training: batch_size must be >= 1");
  }
  if (epochs < 1) {
    throw std::invalid_argument("training: epochs must be >= 1");
  }
  if (!(lr_init >= 0.0) || !(lr_peak >= lr_init)) {
    throw std::invalid_argument("training: require 0 <= lr_init <= lr_peak");
  }
  if (lr_final && !(*lr_final >= 0.0)) {
    throw std::invalid_argument("training: lr_final must be >= 0");
  }
  if (!(warmup_fraction > 0.0) || !(warmup_fraction < 1.0)) {
    throw std::invalid_argument("training: warmup_fraction must lie in (0, 1)");
  }
}

double one_cycle_lr(
  std::size_t step, std::size_t total_steps, double lr_init, double lr_peak,
  std::optional<double> lr_final, double warmup_fraction)
{
  if (total_steps == 0) {
    throw std::invalid_argument("one_cycle_lr: total_steps must be positive");
  }
  if (step >= total_steps) {
    throw std::out_of_range("one_cycle_lr: step beyond schedule");
  }
  const double final_lr = lr_final.value_or(lr_init / 10.0);
  const double warm = warmup_fraction * static_cast<double>(total_steps);
  const auto s = static_cast<double>(step);
  if (s < warm) {
    return lr_init + (lr_peak - lr_init) * s / warm;
  }
  const double span = static_cast<double>(total_steps - 1) - warm;
  if (span <= 0.0) {
    return final_lr;
  }
  const double progress = std::min(1.0, (s - warm) / span);
  return final_lr + 0.5 * (lr_peak - final_lr) * (1.0 + std::cos(std::numbers::pi * progress));
}

std::vector<TrainingExample> prepare_examples(
  const std::vector<Scene> & scenes, InteractionBoundary tau, double position_scale)
{
  std::vector<TrainingExample> out;
  out.reserve(scenes.size());
  for (const auto & s : scenes) {
    s.validate();
    out.push_back(
      {s.id, history_offsets(s.x, position_scale), future_offsets(s.y, s.x, position_scale),
       scene_graph(s.x, tau)});
  }
  return out;
}

double auto_position_scale(const std::vector<Scene> & scenes)
{
  std::vector<const Scene *> sorted;
  for (const auto & s : scenes) {
    sorted.push_back(&s);
  }
  std::stable_sort(sorted.begin(), sorted.end(), [](const Scene * a, const Scene * b) {
    return a->id < b->id;
  });
  double sum = 0.0;
  std::size_t count = 0;
  for (const Scene * s : sorted) {
    const Tensor offsets = future_offsets(s->y, s->x);
    sum += squared_norm(offsets);
    count += offsets.size();
  }
  const double rms = count > 0 ? std::sqrt(sum / static_cast<double>(count)) : 0.0;
  return rms > 0.0 ? rms : 1.0;
}

double batch_loss(
  const TrajUGnet & net, const ParamSet & params, const NoiseSchedule & schedule,
  std::span<const TrainingExample * const> batch, std::span<const NoiseDraw> draws,
  ParamSet * grad, int threads)
{
  if (batch.size() != draws.size() || batch.empty()) {
    throw std::invalid_argument("batch_loss: batch and draws must be non-empty and aligned");
  }
  std::size_t total_elements = 0;
  for (const auto * ex : batch) {
    total_elements += ex->y0.size();
  }
  const auto norm = static_cast<double>(total_elements);

  // The partition into chunks, and so the summation order, is independent
  // of the thread count.
  const std::size_t chunks = std::min(batch.size(), kReductionChunks);
  const std::size_t chunk = (batch.size() + chunks - 1) / chunks;
  std::vector<double> chunk_sse(chunks, 0.0);
  std::vector<ParamSet> chunk_grads(grad != nullptr ? chunks : 0);
  std::vector<std::string> failures(chunks);

  parallel_for(chunks, std::max(threads, 1), [&](std::size_t w) {
    if (grad != nullptr) {
      chunk_grads[w] = params.zeros_like();
    }
    const std::size_t end = std::min(batch.size(), (w + 1) * chunk);
    for (std::size_t i = w * chunk; i < end; ++i) {
      const TrainingExample & ex = *batch[i];
      const NoiseDraw & draw = draws[i];
      const Tensor y_k = q_sample(ex.y0, draw.k, schedule, draw.eps);
      ForwardCache cache;
      const Tensor pred =
        net.forward(params, y_k, draw.k, ex.x, ex.a_hat, grad != nullptr ? &cache : nullptr);
      if (!pred.all_finite()) {
        failures[w] = "non-finite denoiser output at step " + std::to_string(draw.k) +
                      " for scene " + ex.id;
        return;
      }
      Tensor d_out(pred.shape());
      for (std::size_t j = 0; j < pred.size(); ++j) {
        const double diff = pred[j] - draw.eps[j];
        chunk_sse[w] += diff * diff;
        d_out[j] = 2.0 * diff / norm;
      }
      if (grad != nullptr) {
        net.backward(params, cache, d_out, chunk_grads[w]);
      }
    }
  });
  for (const auto & f : failures) {
    if (!f.empty()) {
      throw NumericalError(f);
    }
  }
  if (grad != nullptr) {
    *grad = params.zeros_like();
    for (const auto & g : chunk_grads) {
      grad->add_scaled(g, 1.0);
    }
  }
  return std::accumulate(chunk_sse.begin(), chunk_sse.end(), 0.0) / norm;
}

void sgd_step(ParamSet & params, const ParamSet & grad, double lr)
{
  params.add_scaled(grad, -lr);
}

nlohmann::json denoiser_config_to_json(const DenoiserConfig & c)
{
  return {
    {"channels", c.channels},
    {"levels", c.levels},
    {"blocks_per_level", c.blocks_per_level},
    {"disable_unet", c.disable_unet},
    {"disable_dgc", c.disable_dgc},
    {"disable_residual", c.disable_residual}};
}

nlohmann::json train_config_to_json(const TrainConfig & c)
{
  nlohmann::json j = {
    {"batch_size", c.batch_size},
    {"epochs", c.epochs},
    {"lr_init", c.lr_init},
    {"lr_peak", c.lr_peak},
    {"warmup_fraction", c.warmup_fraction},
    {"seed", c.seed},
    {"threads", c.threads}};
  j["lr_final"] = c.lr_final ? nlohmann::json(*c.lr_final) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json tau_to_json(InteractionBoundary tau)
{
  return tau ? nlohmann::json(*tau) : nlohmann::json("none");
}

InteractionBoundary tau_from_json(const nlohmann::json & j)
{
  if (j.is_null() || (j.is_string() && (j == "none" || j == "None"))) {
    return std::nullopt;
  }
  if (!j.is_number() || !(j.get<double>() > 0.0)) {
    throw std::invalid_argument("tau must be a positive number or \"none\"");
  }
  return j.get<double>();
}

nlohmann::json checkpoint_to_json(const Checkpoint & ckpt)
{
  nlohmann::json params = nlohmann::json::array();
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    const Tensor & t = ckpt.params[i];
    params.push_back({{"name", ckpt.params.name(i)}, {"shape", t.shape()}, {"data", t.storage()}});
  }
  nlohmann::json config = ckpt.run_config.is_object() ? ckpt.run_config : nlohmann::json::object();
  nlohmann::json denoiser = denoiser_config_to_json(ckpt.denoiser);
  config["denoiser"] = denoiser;
  config["training"] = train_config_to_json(ckpt.training);
  config["graph"] = {{"tau", tau_to_json(ckpt.tau)}};
  config["diffusion"] = {
    {"steps", ckpt.steps},
    {"beta_1", ckpt.beta_first},
    {"beta_K", ckpt.beta_last},
    {"per_step_denominator", ckpt.denominator == ReverseDenominator::kPerStep},
    {"position_scale", ckpt.position_scale}};
  config["data_shape"] = {
    {"features", ckpt.denoiser.features},
    {"t_obs", ckpt.denoiser.t_obs},
    {"t_pred", ckpt.denoiser.t_pred}};
  return {
    {"version", ckpt.version},
    {"params", std::move(params)},
    {"schedule", {{"steps", ckpt.steps}, {"beta_1", ckpt.beta_first}, {"beta_K", ckpt.beta_last}}},
    {"config", std::move(config)},
    {"step", ckpt.step},
    {"rng_state", ckpt.rng_state},
    {"config_hash", ckpt.config_hash},
    {"data_hash", ckpt.data_hash}};
}

Checkpoint checkpoint_from_json(const nlohmann::json & j)
{
  try {
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw CheckpointError(
        "checkpoint version mismatch: file has " + std::to_string(version) + ", expected " +
        std::to_string(kCheckpointVersion));
    }
    Checkpoint c;
    c.version = version;
    const auto & config = j.at("config");
    const auto & d = config.at("denoiser");
    c.denoiser.channels = d.at("channels").get<std::size_t>();
    c.denoiser.levels = d.at("levels").get<std::size_t>();
    c.denoiser.blocks_per_level = d.at("blocks_per_level").get<std::size_t>();
    c.denoiser.disable_unet = d.at("disable_unet").get<bool>();
    c.denoiser.disable_dgc = d.at("disable_dgc").get<bool>();
    c.denoiser.disable_residual = d.at("disable_residual").get<bool>();
    const auto & shape = config.at("data_shape");
    c.denoiser.features = shape.at("features").get<std::size_t>();
    c.denoiser.t_obs = shape.at("t_obs").get<std::size_t>();
    c.denoiser.t_pred = shape.at("t_pred").get<std::size_t>();

    const auto & t = config.at("training");
    c.training.batch_size = t.at("batch_size").get<std::size_t>();
    c.training.epochs = t.at("epochs").get<std::size_t>();
    c.training.lr_init = t.at("lr_init").get<double>();
    c.training.lr_peak = t.at("lr_peak").get<double>();
    if (!t.at("lr_final").is_null()) {
      c.training.lr_final = t.at("lr_final").get<double>();
    }
    c.training.warmup_fraction = t.at("warmup_fraction").get<double>();
    c.training.seed = t.at("seed").get<std::uint64_t>();
    c.training.threads = t.at("threads").get<int>();

    c.tau = tau_from_json(config.at("graph").at("tau"));
    c.denominator = config.at("diffusion").at("per_step_denominator").get<bool>()
                      ? ReverseDenominator::kPerStep
                      : ReverseDenominator::kCumulative;
    c.position_scale = config.at("diffusion").at("position_scale").get<double>();
    if (!(c.position_scale > 0.0)) {
      throw CheckpointError("corrupt checkpoint: position_scale must be positive");
    }
    const auto & s = j.at("schedule");
    c.steps = s.at("steps").get<int>();
    c.beta_first = s.at("beta_1").get<double>();
    c.beta_last = s.at("beta_K").get<double>();
    c.step = j.at("step").get<std::uint64_t>();
    c.rng_state = j.at("rng_state").get<std::string>();
    c.config_hash = j.at("config_hash").get<std::string>();
    c.data_hash = j.at("data_hash").get<std::string>();
    c.run_config = config;

    const TrajUGnet net(c.denoiser);
    c.params = net.layout();
    const auto & params = j.at("params");
    if (params.size() != c.params.size()) {
      throw CheckpointError("corrupt checkpoint: parameter count does not match the network");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto & p = params[i];
      const auto name = p.at("name").get<std::string>();
      if (name != c.params.name(i) || p.at("shape").get<Shape>() != c.params[i].shape()) {
        throw CheckpointError("corrupt checkpoint: parameter '" + name + "' does not match the network");
      }
      c.params[i] = Tensor(c.params[i].shape(), p.at("data").get<std::vector<double>>());
    }
    return c;
  } catch (const CheckpointError &) {
    throw;
  } catch (const std::exception & e) {
    throw CheckpointError(std::string("corrupt checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint & ckpt, const std::filesystem::path & path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw CheckpointError("cannot write checkpoint: " + path.string());
  }
  out << checkpoint_to_json(ckpt).dump() << '\n';
  if (!out) {
    throw CheckpointError("failed writing checkpoint: " + path.string());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CheckpointError("cannot open checkpoint: " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buffer.str());
  } catch (const std::exception & e) {
    throw CheckpointError(std::string("corrupt checkpoint: ") + e.what());
  }
  return checkpoint_from_json(j);
}

nlohmann::json epoch_log_to_json(const EpochLog & log)
{
  return {{"epoch", log.epoch}, {"mean_loss", log.mean_loss}, {"lr_last", log.lr_last}};
}

TrainResult train(
  const std::vector<Scene> & scenes, const TrainSetup & setup, const EpochCallback & on_epoch)
{
  const TrajUGnet net(setup.denoiser);
  Rng init_rng(derive_seed(setup.training.seed, 1, 0));
  return train_from(scenes, setup, net.init_params(init_rng), on_epoch);
}

TrainResult train_from(
  const std::vector<Scene> & scenes, const TrainSetup & setup, ParamSet initial,
  const EpochCallback & on_epoch)
{
  setup.training.validate();
  if (scenes.empty()) {
    throw std::invalid_argument("train: empty dataset");
  }
  const TrajUGnet net(setup.denoiser);
  if (!initial.same_layout(net.layout())) {
    throw std::invalid_argument("train: initial parameters do not match the network layout");
  }
  for (const auto & s : scenes) {
    if (s.t_obs() != setup.denoiser.t_obs || s.t_pred() != setup.denoiser.t_pred) {
      throw std::invalid_argument(
        "train: scene " + s.id + " has t_obs/t_pred " + std::to_string(s.t_obs()) + "/" +
        std::to_string(s.t_pred()) + " but the model expects " +
        std::to_string(setup.denoiser.t_obs) + "/" + std::to_string(setup.denoiser.t_pred));
    }
  }
  if (setup.position_scale && !(*setup.position_scale > 0.0)) {
    throw std::invalid_argument("train: position_scale must be positive");
  }
  const double position_scale = setup.position_scale.value_or(auto_position_scale(scenes));
  std::vector<TrainingExample> examples = prepare_examples(scenes, setup.tau, position_scale);
  std::stable_sort(examples.begin(), examples.end(), [](const auto & a, const auto & b) {
    return a.id < b.id;
  });
  const NoiseSchedule schedule =
    make_noise_schedule(setup.steps, setup.beta_first, setup.beta_last);
  const TrainConfig & tc = setup.training;

  const std::size_t batch_size = tc.batch_size;
  const std::size_t batches_per_epoch = (examples.size() + batch_size - 1) / batch_size;
  // Slots per epoch: the data itself, or one full batch cycling over it.
  const std::size_t epoch_slots = std::max(examples.size(), batch_size);
  const std::size_t total_steps = batches_per_epoch * tc.epochs;

  Checkpoint ckpt;
  ckpt.params = std::move(initial);
  ckpt.denoiser = setup.denoiser;
  ckpt.training = tc;
  ckpt.steps = setup.steps;
  ckpt.beta_first = setup.beta_first;
  ckpt.beta_last = setup.beta_last;
  ckpt.tau = setup.tau;
  ckpt.denominator = setup.denominator;
  ckpt.position_scale = position_scale;

  Rng rng(tc.seed);
  ckpt.rng_state = rng.state();
  TrainResult result;
  ParamSet grad;
  std::vector<std::size_t> order(examples.size());
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng.engine());
    double epoch_sse = 0.0;
    std::size_t epoch_elements = 0;
    double lr = 0.0;
    for (std::size_t b = 0; b < batches_per_epoch; ++b) {
      const std::size_t begin = b * batch_size;
      const std::size_t end = std::min(epoch_slots, begin + batch_size);
      std::vector<const TrainingExample *> batch;
      std::vector<NoiseDraw> draws;
      std::size_t elements = 0;
      for (std::size_t i = begin; i < end; ++i) {
        const TrainingExample & ex = examples[order[i % order.size()]];
        batch.push_back(&ex);
        NoiseDraw draw;
        draw.k = rng.uniform_int(1, schedule.steps());
        draw.eps = rng.normal_tensor(ex.y0.shape());
        draws.push_back(std::move(draw));
        elements += ex.y0.size();
      }
      double loss = 0.0;
      try {
        loss = batch_loss(net, ckpt.params, schedule, batch, draws, &grad, tc.threads);
      } catch (const NumericalError & e) {
        throw TrainingDiverged(std::string(e.what()) + " (batch step " + std::to_string(step) + ")", ckpt);
      }
      if (!std::isfinite(loss) || !grad.all_finite()) {
        throw TrainingDiverged("non-finite loss at batch step " + std::to_string(step), ckpt);
      }
      lr = one_cycle_lr(step, total_steps, tc.lr_init, tc.lr_peak, tc.lr_final, tc.warmup_fraction);
      Checkpoint last_good = ckpt;
      sgd_step(ckpt.params, grad, lr);
      if (!ckpt.params.all_finite()) {
        throw TrainingDiverged("non-finite parameters after batch step " + std::to_string(step),
                               std::move(last_good));
      }
      ++step;
      ckpt.step = step;
      epoch_sse += loss * static_cast<double>(elements);
      epoch_elements += elements;
    }
    ckpt.rng_state = rng.state();
    EpochLog log{epoch, epoch_sse / static_cast<double>(epoch_elements), lr};
    result.log.push_back(log);
    if (on_epoch) {
      on_epoch(log);
    }
  }
  result.checkpoint = std::move(ckpt);
  return result;
}

void check_compatible(const Checkpoint & ckpt, const Scene & scene)
{
  auto mismatch = [&](const char * what, std::size_t model, std::size_t data) {
    if (model != data) {
      throw std::invalid_argument(
        std::string("incompatible ") + what + ": checkpoint has " + std::to_string(model) +
        ", scene " + scene.id + " has " + std::to_string(data));
    }
  };
  mismatch("features", ckpt.denoiser.features, scene.x.dim(0));
  mismatch("t_obs", ckpt.denoiser.t_obs, scene.t_obs());
  mismatch("t_pred", ckpt.denoiser.t_pred, scene.t_pred());
}

SamplingResult forecast_scene(
  const Checkpoint & ckpt, const TrajUGnet & net, const Scene & scene, std::size_t n_samples,
  Rng & rng, int threads)
{
  check_compatible(ckpt, scene);
  const UGnetPredictor predictor(net, ckpt.params);
  SamplingResult result = sample_trajectories(
    predictor, history_offsets(scene.x, ckpt.position_scale), scene_graph(scene.x, ckpt.tau),
    scene.t_pred(), ckpt.schedule(), n_samples, rng, ckpt.denominator, threads);
  for (auto & s : result.samples) {
    s = future_positions(s, scene.x, ckpt.position_scale);
  }
  return result;
}

}  // namespace vesselcast
