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
#ifndef VESSELCAST__GEO_HPP_
#define VESSELCAST__GEO_HPP_

namespace vesselcast
{

/// Mean Earth radius [m].
inline constexpr double kEarthRadiusM = 6371000.0;
/// Metres per hectometre, the distance unit used by scenes and metrics.
inline constexpr double kMetresPerHm = 100.0;

struct LatLon
{
  double lat = 0.0;
  double lon = 0.0;
};

/// Planar position in hectometres; x points east, y points north.
struct LocalXY
{
  double x = 0.0;
  double y = 0.0;
};

/// Equirectangular projection about \p origin, in hectometres.
LocalXY to_local_coords(const LatLon & point, const LatLon & origin);

/// Inverse of to_local_coords.
LatLon from_local_coords(const LocalXY & point, const LatLon & origin);

bool valid_lat_lon(double lat, double lon);

}  // namespace vesselcast

#endif  // VESSELCAST__GEO_HPP_
