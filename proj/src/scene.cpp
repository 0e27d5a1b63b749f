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
#include "vesselcast/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

namespace vesselcast
{

void Scene::validate() const
{
  if (x.rank() != 3 || y.rank() != 3 || x.dim(0) != kFeatures || y.dim(0) != kFeatures) {
    throw std::invalid_argument("scene " + id + ": x and y must be 2 x V x T");
  }
  if (x.dim(1) != y.dim(1) || x.dim(1) == 0) {
    throw std::invalid_argument("scene " + id + ": vessel count mismatch between x and y");
  }
  if (vessel_ids.size() != x.dim(1)) {
    throw std::invalid_argument("scene " + id + ": vessel id list does not match V");
  }
  if (x.dim(2) == 0 || y.dim(2) == 0) {
    throw std::invalid_argument("scene " + id + ": empty time axis");
  }
  if (!x.all_finite() || !y.all_finite()) {
    throw std::invalid_argument("scene " + id + ": non-finite coordinates");
  }
}

std::vector<Scene> SceneDataset::split(const std::string & name) const
{
  std::vector<Scene> out;
  std::copy_if(scenes.begin(), scenes.end(), std::back_inserter(out), [&](const Scene & s) {
    return s.split == name;
  });
  return out;
}

std::size_t SceneDataset::max_vessels() const
{
  std::size_t m = 0;
  for (const auto & s : scenes) {
    m = std::max(m, s.vessels());
  }
  return m;
}

void assign_splits(std::vector<Scene> & scenes, double train_fraction, double val_fraction)
{
  const double n = static_cast<double>(scenes.size());
  const auto n_train = static_cast<std::size_t>(std::llround(n * train_fraction));
  const auto n_val = static_cast<std::size_t>(std::llround(n * val_fraction));
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    scenes[i].split = i < n_train ? "train" : (i < n_train + n_val ? "val" : "test");
  }
}

SceneDataset extract_scenes(const std::vector<Trajectory> & trajectories, const ExtractOptions & o)
{
  if (o.t_obs < 1 || o.t_pred < 1) {
    throw std::invalid_argument("extract_scenes: t_obs and t_pred must be positive");
  }
  const std::size_t stride = o.stride == 0 ? o.t_pred : o.stride;
  const auto window = static_cast<long long>(o.t_obs + o.t_pred);

  struct Track
  {
    const Trajectory * trajectory;
    long long first;
    long long last;
  };
  std::vector<Track> tracks;
  long long global_first = 0;
  long long global_last = -1;
  for (const auto & traj : trajectories) {
    if (traj.points.empty()) {
      continue;
    }
    const auto first = std::llround(traj.points.front().t / o.dt);
    const auto last = first + static_cast<long long>(traj.points.size()) - 1;
    if (tracks.empty()) {
      global_first = first;
      global_last = last;
    }
    global_first = std::min(global_first, first);
    global_last = std::max(global_last, last);
    tracks.push_back({&traj, first, last});
  }
  std::stable_sort(tracks.begin(), tracks.end(), [](const Track & a, const Track & b) {
    return a.trajectory->mmsi < b.trajectory->mmsi;
  });

  SceneDataset dataset;
  for (long long start = global_first; !tracks.empty() && start + window - 1 <= global_last;
       start += static_cast<long long>(stride)) {
    const long long end = start + window - 1;
    std::vector<const Track *> members;
    for (const auto & track : tracks) {
      if (track.first <= start && track.last >= end &&
          (members.empty() || members.back()->trajectory->mmsi != track.trajectory->mmsi)) {
        members.push_back(&track);
      }
    }
    if (members.empty()) {
      continue;
    }
    const std::size_t v_count = members.size();
    const long long t0_index = start + static_cast<long long>(o.t_obs) - 1;

    LatLon origin;
    for (const Track * m : members) {
      const auto & p = m->trajectory->points[static_cast<std::size_t>(t0_index - m->first)];
      origin.lat += p.lat / static_cast<double>(v_count);
      origin.lon += p.lon / static_cast<double>(v_count);
    }

    Scene scene;
    scene.x = Tensor({kFeatures, v_count, o.t_obs});
    scene.y = Tensor({kFeatures, v_count, o.t_pred});
    for (std::size_t v = 0; v < v_count; ++v) {
      const Track * m = members[v];
      scene.vessel_ids.push_back(m->trajectory->mmsi);
      for (long long g = start; g <= end; ++g) {
        const auto & p = m->trajectory->points[static_cast<std::size_t>(g - m->first)];
        const LocalXY q = to_local_coords({p.lat, p.lon}, origin);
        const auto step = static_cast<std::size_t>(g - start);
        if (step < o.t_obs) {
          scene.x.at(0, v, step) = q.x;
          scene.x.at(1, v, step) = q.y;
        } else {
          scene.y.at(0, v, step - o.t_obs) = q.x;
          scene.y.at(1, v, step - o.t_obs) = q.y;
        }
      }
    }
    scene.origin = origin;
    scene.t0 = static_cast<double>(t0_index) * o.dt;
    scene.id = "w" + std::to_string(start);
    auto & bucket = v_count >= 2 ? dataset.scenes : dataset.single_vessel;
    bucket.push_back(std::move(scene));
  }
  if (dataset.scenes.empty() && dataset.single_vessel.empty()) {
    dataset.warnings.push_back("no window contains a vessel with complete data");
  }
  assign_splits(dataset.scenes, o.train_fraction, o.val_fraction);
  assign_splits(dataset.single_vessel, o.train_fraction, o.val_fraction);
  return dataset;
}

nlohmann::json tensor3_to_json(const Tensor & t)
{
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < t.dim(0); ++i) {
    nlohmann::json plane = nlohmann::json::array();
    for (std::size_t j = 0; j < t.dim(1); ++j) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t k = 0; k < t.dim(2); ++k) {
        row.push_back(t.at(i, j, k));
      }
      plane.push_back(std::move(row));
    }
    out.push_back(std::move(plane));
  }
  return out;
}

Tensor tensor3_from_json(const nlohmann::json & j)
{
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty() || !j[0][0].is_array()) {
    throw std::invalid_argument("expected a nested 3-d array");
  }
  const std::size_t d0 = j.size();
  const std::size_t d1 = j[0].size();
  const std::size_t d2 = j[0][0].size();
  Tensor t({d0, d1, d2});
  for (std::size_t a = 0; a < d0; ++a) {
    if (j[a].size() != d1) {
      throw std::invalid_argument("ragged 3-d array");
    }
    for (std::size_t b = 0; b < d1; ++b) {
      if (j[a][b].size() != d2) {
        throw std::invalid_argument("ragged 3-d array");
      }
      for (std::size_t c = 0; c < d2; ++c) {
        t.at(a, b, c) = j[a][b][c].get<double>();
      }
    }
  }
  return t;
}

nlohmann::json scene_to_json(const Scene & scene)
{
  nlohmann::json j;
  j["version"] = kSceneFormatVersion;
  j["id"] = scene.id;
  j["split"] = scene.split;
  j["source"] = scene.source;
  if (!scene.family.empty()) {
    j["family"] = scene.family;
  }
  if (!scene.data_hash.empty()) {
    j["data_hash"] = scene.data_hash;
  }
  j["t_obs"] = scene.t_obs();
  j["t_pred"] = scene.t_pred();
  j["origin"] = {scene.origin.lat, scene.origin.lon};
  j["t0"] = scene.t0;
  j["vessels"] = scene.vessel_ids;
  j["x"] = tensor3_to_json(scene.x);
  j["y"] = tensor3_to_json(scene.y);
  return j;
}

Scene scene_from_json(const nlohmann::json & j)
{
  if (j.value("version", 0) != kSceneFormatVersion) {
    throw std::invalid_argument("unsupported scene format version");
  }
  Scene s;
  s.id = j.value("id", std::string{});
  s.split = j.value("split", std::string{"train"});
  s.source = j.value("source", std::string{"ais"});
  s.family = j.value("family", std::string{});
  s.data_hash = j.value("data_hash", std::string{});
  s.origin = {j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>()};
  s.t0 = j.value("t0", 0.0);
  s.vessel_ids = j.at("vessels").get<std::vector<std::string>>();
  s.x = tensor3_from_json(j.at("x"));
  s.y = tensor3_from_json(j.at("y"));
  if (j.at("t_obs").get<std::size_t>() != s.t_obs() ||
      j.at("t_pred").get<std::size_t>() != s.t_pred()) {
    throw std::invalid_argument("scene " + s.id + ": t_obs/t_pred disagree with arrays");
  }
  s.validate();
  return s;
}

void write_scenes_jsonl(const std::filesystem::path & path, const std::vector<Scene> & scenes)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError("cannot write " + path.string());
  }
  for (const auto & s : scenes) {
    out << scene_to_json(s).dump() << '\n';
  }
}

std::vector<Scene> read_scenes_jsonl(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open scenes file: " + path.string());
  }
  std::vector<Scene> scenes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    try {
      scenes.push_back(scene_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception & e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return scenes;
}

}  // namespace vesselcast
