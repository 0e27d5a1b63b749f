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
#include "vesselcast/geo.hpp"

#include <cmath>
#include <numbers>

namespace vesselcast
{

namespace
{
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

LocalXY to_local_coords(const LatLon & point, const LatLon & origin)
{
  const double scale = kEarthRadiusM * kDegToRad / kMetresPerHm;
  return {
    scale * std::cos(origin.lat * kDegToRad) * (point.lon - origin.lon),
    scale * (point.lat - origin.lat)};
}

LatLon from_local_coords(const LocalXY & point, const LatLon & origin)
{
  const double scale = kEarthRadiusM * kDegToRad / kMetresPerHm;
  return {
    origin.lat + point.y / scale,
    origin.lon + point.x / (scale * std::cos(origin.lat * kDegToRad))};
}

bool valid_lat_lon(double lat, double lon)
{
  return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 &&
         lon >= -180.0 && lon <= 180.0;
}

}  // namespace vesselcast
