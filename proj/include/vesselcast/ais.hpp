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
#ifndef VESSELCAST__AIS_HPP_
#define VESSELCAST__AIS_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace vesselcast
{

/// Raised for unreadable input, unresolvable columns or a file without valid rows.
class InputError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct RawAisRecord
{
  std::string mmsi;
  double timestamp = 0.0;  // seconds since epoch
  double lat = 0.0;        // degrees
  double lon = 0.0;        // degrees

  bool operator==(const RawAisRecord &) const = default;
};

struct ColumnMap
{
  std::string mmsi = "mmsi";
  std::string timestamp = "timestamp";
  std::string lat = "lat";
  std::string lon = "lon";
};

struct ParseReport
{
  std::vector<RawAisRecord> records;
  std::size_t rows = 0;
  std::size_t malformed = 0;
};

/// Reads a headed CSV of AIS positions. Rows that fail to parse or violate
/// the coordinate ranges are counted in ParseReport::malformed.
ParseReport parse_ais_csv(const std::filesystem::path & path, const ColumnMap & columns = {});

struct TrajectoryPoint
{
  double t = 0.0;
  double lat = 0.0;
  double lon = 0.0;

  bool operator==(const TrajectoryPoint &) const = default;
};

struct Trajectory
{
  std::string mmsi;
  std::vector<TrajectoryPoint> points;

  bool operator==(const Trajectory &) const = default;
};

struct ResampleOptions
{
  double dt = 10.0;       // grid spacing [s]
  double gap_max = 120.0; // longer gaps split the track [s]
};

/// Linear interpolation of one vessel's records onto the absolute grid
/// t = n * dt. Never extrapolates. Each gap longer than gap_max starts a new
/// segment; segments may contain zero or one grid point.
/// Throws InputError when fewer than two distinct usable records remain.
std::vector<Trajectory> resample_trajectory(
  std::vector<RawAisRecord> records, const ResampleOptions & options = {});

/// Removes points implying a speed above \p v_max_hm_per_s (and duplicate
/// timestamps), then refills removed interior points by interpolation
/// between the surviving neighbours. Removed end points are dropped.
Trajectory clean_anomalies(const Trajectory & trajectory, double v_max_hm_per_s = 0.3);

std::map<std::string, std::vector<RawAisRecord>> group_by_vessel(
  const std::vector<RawAisRecord> & records);

struct TrackReport
{
  std::vector<Trajectory> trajectories;
  std::size_t vessels = 0;
  std::size_t skipped_vessels = 0;
  std::size_t dropped_segments = 0;
};

/// Group, resample and clean every vessel; segments shorter than two grid
/// points are dropped.
TrackReport build_tracks(
  const std::vector<RawAisRecord> & records, const ResampleOptions & options, double v_max);

}  // namespace vesselcast

#endif  // VESSELCAST__AIS_HPP_
