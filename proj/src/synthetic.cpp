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
#include "vesselcast/synthetic.hpp"

#include "vesselcast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vesselcast
{

namespace
{

constexpr double kPi = std::numbers::pi;

LocalXY arc(const LocalXY & p0, double heading, double speed, double turn_rate, double t)
{
  if (std::abs(turn_rate) < 1e-12) {
    return {p0.x + speed * t * std::cos(heading), p0.y + speed * t * std::sin(heading)};
  }
  const double r = speed / turn_rate;
  return {
    p0.x + r * (std::sin(heading + turn_rate * t) - std::sin(heading)),
    p0.y + r * (std::cos(heading) - std::cos(heading + turn_rate * t))};
}

double uniform(Rng & rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

// Places vessel b so that it passes vessel a at distance cpa_distance,
// cpa_step steps after t0.
std::pair<VesselMotion, VesselMotion> crossing_pair(
  double speed_a, double heading_a, double speed_b, double heading_b, double cpa_step,
  double cpa_distance)
{
  const LocalXY va{speed_a * std::cos(heading_a), speed_a * std::sin(heading_a)};
  const LocalXY vb{speed_b * std::cos(heading_b), speed_b * std::sin(heading_b)};
  const LocalXY dv{vb.x - va.x, vb.y - va.y};
  const double dv_norm = std::hypot(dv.x, dv.y);
  const LocalXY normal{-dv.y / dv_norm, dv.x / dv_norm};
  const LocalXY meet_a{0.0, 0.0};
  const LocalXY meet_b{cpa_distance * normal.x, cpa_distance * normal.y};
  const auto a = VesselMotion::straight(
    {meet_a.x - va.x * cpa_step, meet_a.y - va.y * cpa_step}, va);
  const auto b = VesselMotion::straight(
    {meet_b.x - vb.x * cpa_step, meet_b.y - vb.y * cpa_step}, vb);
  return {a, b};
}

}  // namespace

VesselMotion VesselMotion::straight(LocalXY position, LocalXY velocity)
{
  VesselMotion m;
  m.position = position;
  m.heading = std::atan2(velocity.y, velocity.x);
  m.speed = std::hypot(velocity.x, velocity.y);
  m.speed_after = m.speed;
  return m;
}

LocalXY VesselMotion::at(double t) const
{
  if (t <= 0.0) {
    return arc(position, heading, speed, turn_rate, t);
  }
  return arc(position, heading, speed_after, turn_rate_after, t);
}

bool is_known_family(const std::string & family)
{
  return family == "constant-velocity" || family == "turn" || family == "crossing" ||
         family == "give-way";
}

Scene scene_from_motions(
  const std::vector<VesselMotion> & motions, std::size_t t_obs, std::size_t t_pred, double noise,
  Rng * rng, const LatLon & base_origin)
{
  const std::size_t v_count = motions.size();
  Tensor x({kFeatures, v_count, t_obs});
  Tensor y({kFeatures, v_count, t_pred});
  for (std::size_t v = 0; v < v_count; ++v) {
    for (std::size_t s = 0; s < t_obs + t_pred; ++s) {
      const double t = static_cast<double>(s) - static_cast<double>(t_obs - 1);
      LocalXY p = motions[v].at(t);
      if (noise > 0.0 && rng != nullptr) {
        p.x += noise * rng->normal();
        p.y += noise * rng->normal();
      }
      Tensor & dst = s < t_obs ? x : y;
      const std::size_t step = s < t_obs ? s : s - t_obs;
      dst.at(0, v, step) = p.x;
      dst.at(1, v, step) = p.y;
    }
  }
  LocalXY centroid;
  for (std::size_t v = 0; v < v_count; ++v) {
    centroid.x += x.at(0, v, t_obs - 1) / static_cast<double>(v_count);
    centroid.y += x.at(1, v, t_obs - 1) / static_cast<double>(v_count);
  }
  for (Tensor * t : {&x, &y}) {
    for (std::size_t v = 0; v < v_count; ++v) {
      for (std::size_t s = 0; s < t->dim(2); ++s) {
        t->at(0, v, s) -= centroid.x;
        t->at(1, v, s) -= centroid.y;
      }
    }
  }
  Scene scene;
  scene.x = std::move(x);
  scene.y = std::move(y);
  scene.origin = from_local_coords(centroid, base_origin);
  scene.source = "synthetic";
  for (std::size_t v = 0; v < v_count; ++v) {
    scene.vessel_ids.push_back("v" + std::to_string(v));
  }
  return scene;
}

std::vector<VesselMotion> sample_family_motions(
  const std::string & family, const SyntheticConfig & config, Rng & rng)
{
  if (!is_known_family(family)) {
    throw UnknownFamilyError("unknown scenario family: " + family);
  }
  const std::size_t v_count = std::max<std::size_t>(config.vessels, 1);
  std::vector<VesselMotion> motions;

  auto random_straight = [&]() {
    const double heading = uniform(rng, -kPi, kPi);
    const double speed = config.speed * uniform(rng, 0.6, 1.4);
    return VesselMotion::straight(
      {uniform(rng, -6.0, 6.0), uniform(rng, -6.0, 6.0)},
      {speed * std::cos(heading), speed * std::sin(heading)});
  };

  if (family == "constant-velocity") {
    for (std::size_t v = 0; v < v_count; ++v) {
      motions.push_back(random_straight());
    }
  } else if (family == "turn") {
    for (std::size_t v = 0; v < v_count; ++v) {
      VesselMotion m = random_straight();
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      m.turn_rate = sign * config.turn_rate * uniform(rng, 0.7, 1.3);
      m.turn_rate_after = m.turn_rate;
      motions.push_back(m);
    }
  } else {
    const double heading_a = uniform(rng, -kPi, kPi);
    const double heading_b = heading_a + uniform(rng, 0.4, 0.6) * kPi;
    const double speed_a = config.speed * uniform(rng, 0.8, 1.2);
    const double speed_b = config.speed * uniform(rng, 0.8, 1.2);
    const double cpa_step = static_cast<double>(
      rng.uniform_int(1, static_cast<int>(std::max<std::size_t>(config.t_pred, 1))));
    const double cpa_distance = uniform(rng, 0.5, 2.0);
    auto [a, b] = crossing_pair(speed_a, heading_a, speed_b, heading_b, cpa_step, cpa_distance);
    if (family == "give-way") {
      // b yields: slows down and turns to starboard after t0.
      b.speed_after = 0.5 * b.speed;
      b.turn_rate_after = -config.turn_rate * uniform(rng, 0.8, 1.2);
    }
    motions.push_back(a);
    motions.push_back(b);
    while (motions.size() < v_count) {
      motions.push_back(random_straight());
    }
  }
  return motions;
}

SceneDataset generate_synthetic_scenes(const SyntheticConfig & config, std::uint64_t seed)
{
  SceneDataset dataset;
  dataset.provenance = "synthetic";
  for (std::size_t f = 0; f < config.families.size(); ++f) {
    const std::string & family = config.families[f];
    if (!is_known_family(family)) {
      throw UnknownFamilyError("unknown scenario family: " + family);
    }
    std::vector<Scene> scenes;
    for (std::size_t i = 0; i < config.scenes_per_family; ++i) {
      Rng rng(derive_seed(seed, f, i));
      const auto motions = sample_family_motions(family, config, rng);
      Scene scene =
        scene_from_motions(motions, config.t_obs, config.t_pred, config.noise, &rng, config.origin);
      scene.id = "syn-" + family + "-" + std::to_string(i);
      scene.family = family;
      scenes.push_back(std::move(scene));
    }
    assign_splits(scenes, config.train_fraction, config.val_fraction);
    for (auto & s : scenes) {
      (s.vessels() >= 2 ? dataset.scenes : dataset.single_vessel).push_back(std::move(s));
    }
  }
  return dataset;
}

std::vector<VesselMotion> symmetric_crossing_motions(double speed, double meet_step)
{
  const double h = kPi / 4.0;
  const LocalXY va{speed * std::cos(h), speed * std::sin(h)};
  const LocalXY vb{-speed * std::cos(h), speed * std::sin(h)};
  return {
    VesselMotion::straight({-va.x * meet_step, -va.y * meet_step}, va),
    VesselMotion::straight({-vb.x * meet_step, -vb.y * meet_step}, vb)};
}

}  // namespace vesselcast
