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
#ifndef VESSELCAST__SYNTHETIC_HPP_
#define VESSELCAST__SYNTHETIC_HPP_

#include "vesselcast/rng.hpp"
#include "vesselcast/scene.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vesselcast
{

class UnknownFamilyError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Piecewise constant-turn-rate motion; t is measured in grid steps with
/// t = 0 at the prediction instant. The "after" values apply for t > 0.
struct VesselMotion
{
  LocalXY position;       // at t = 0 [hm]
  double heading = 0.0;   // [rad], counter-clockwise from east
  double speed = 0.3;     // [hm / step]
  double turn_rate = 0.0; // [rad / step], positive turns to port
  double speed_after = 0.3;
  double turn_rate_after = 0.0;

  static VesselMotion straight(LocalXY position, LocalXY velocity);
  LocalXY at(double t) const;
};

struct SyntheticConfig
{
  std::vector<std::string> families{"constant-velocity", "turn", "crossing", "give-way"};
  std::size_t scenes_per_family = 2;
  std::size_t vessels = 2;
  std::size_t t_obs = 10;
  std::size_t t_pred = 15;
  double noise = 0.0;      // position noise std [hm]
  double speed = 0.3;      // nominal speed [hm / step]
  double turn_rate = 0.08; // nominal turn rate [rad / step]
  LatLon origin{38.95, 118.5};
  double train_fraction = 1.0;
  double val_fraction = 0.0;
};

bool is_known_family(const std::string & family);

/// Samples each motion at steps -(t_obs - 1) ... t_pred, adds position noise
/// and recenters the frame on the observed centroid at t = 0.
Scene scene_from_motions(
  const std::vector<VesselMotion> & motions, std::size_t t_obs, std::size_t t_pred,
  double noise, Rng * rng, const LatLon & base_origin);

/// Vessel motions of one scenario of \p family.
std::vector<VesselMotion> sample_family_motions(
  const std::string & family, const SyntheticConfig & config, Rng & rng);

/// Deterministic in (config, seed); scene i of family f draws from its own
/// derived seed.
SceneDataset generate_synthetic_scenes(const SyntheticConfig & config, std::uint64_t seed);

/// Two vessels at equal speed on mirror-image headings that meet at the
/// origin \p meet_step steps after t0.
std::vector<VesselMotion> symmetric_crossing_motions(double speed, double meet_step);

}  // namespace vesselcast

#endif  // VESSELCAST__SYNTHETIC_HPP_
