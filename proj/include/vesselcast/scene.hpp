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
#ifndef VESSELCAST__SCENE_HPP_
#define VESSELCAST__SCENE_HPP_

#include "vesselcast/ais.hpp"
#include "vesselcast/geo.hpp"
#include "vesselcast/tensor.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace vesselcast
{

inline constexpr std::size_t kFeatures = 2;
inline constexpr int kSceneFormatVersion = 1;

/// One interaction window in a local hectometre frame. x is 2 x V x T_obs,
/// y is 2 x V x T_pred; feature 0 is east, feature 1 is north. The last
/// observed step is the prediction instant t0.
struct Scene
{
  std::string id;
  std::vector<std::string> vessel_ids;
  Tensor x;
  Tensor y;
  LatLon origin;
  double t0 = 0.0;
  std::string split = "train";
  std::string source = "ais";
  std::string family;
  std::string data_hash;

  std::size_t vessels() const { return x.dim(1); }
  std::size_t t_obs() const { return x.dim(2); }
  std::size_t t_pred() const { return y.dim(2); }

  /// Throws std::invalid_argument when shapes disagree or values are not finite.
  void validate() const;
};

struct SceneDataset
{
  std::vector<Scene> scenes;         // interaction scenes, V >= 2
  std::vector<Scene> single_vessel;  // windows with exactly one complete vessel
  std::string provenance = "ais";
  std::vector<std::string> warnings;

  std::vector<Scene> split(const std::string & name) const;
  std::size_t max_vessels() const;
};

struct ExtractOptions
{
  std::size_t t_obs = 10;
  std::size_t t_pred = 15;
  std::size_t stride = 0;  // 0 selects t_pred
  double dt = 10.0;
  double train_fraction = 0.8;
  double val_fraction = 0.1;
};

/// Sliding windows of t_obs + t_pred grid steps over tracks sharing the
/// absolute grid t = n * dt. A vessel is part of a window when one of its
/// tracks covers every step of it. Windows start at the earliest grid step
/// and advance by stride.
SceneDataset extract_scenes(
  const std::vector<Trajectory> & trajectories, const ExtractOptions & options = {});

/// Chronological train/val/test tags over the order of \p scenes.
void assign_splits(std::vector<Scene> & scenes, double train_fraction, double val_fraction);

nlohmann::json tensor3_to_json(const Tensor & t);
Tensor tensor3_from_json(const nlohmann::json & j);

nlohmann::json scene_to_json(const Scene & scene);
Scene scene_from_json(const nlohmann::json & j);

void write_scenes_jsonl(const std::filesystem::path & path, const std::vector<Scene> & scenes);
std::vector<Scene> read_scenes_jsonl(const std::filesystem::path & path);

}  // namespace vesselcast

#endif  // VESSELCAST__SCENE_HPP_
