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
#include "vesselcast/ais.hpp"

#include "vesselcast/geo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace vesselcast
{

namespace
{

std::string trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r\n\"");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n\"");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string & line)
{
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(trim(current));
  return fields;
}

std::optional<double> parse_double(const std::string & s)
{
  if (s.empty()) {
    return std::nullopt;
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::size_t find_column(const std::vector<std::string> & header, const std::string & name)
{
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw InputError("column '" + name + "' not found in CSV header");
  }
  return static_cast<std::size_t>(it - header.begin());
}

double speed_hm_per_s(const TrajectoryPoint & a, const TrajectoryPoint & b, const LatLon & origin)
{
  const LocalXY pa = to_local_coords({a.lat, a.lon}, origin);
  const LocalXY pb = to_local_coords({b.lat, b.lon}, origin);
  const double dt = std::abs(b.t - a.t);
  return std::hypot(pb.x - pa.x, pb.y - pa.y) / dt;
}

TrajectoryPoint lerp(const TrajectoryPoint & a, const TrajectoryPoint & b, double t)
{
  const double w = (t - a.t) / (b.t - a.t);
  return {t, a.lat + w * (b.lat - a.lat), a.lon + w * (b.lon - a.lon)};
}

}  // namespace

ParseReport parse_ais_csv(const std::filesystem::path & path, const ColumnMap & columns)
{
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open AIS file: " + path.string());
  }
  ParseReport report;
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw InputError("zero valid rows in " + path.string());
  }
  const auto header = split_csv_line(line);
  const std::size_t i_mmsi = find_column(header, columns.mmsi);
  const std::size_t i_time = find_column(header, columns.timestamp);
  const std::size_t i_lat = find_column(header, columns.lat);
  const std::size_t i_lon = find_column(header, columns.lon);
  const std::size_t needed = std::max({i_mmsi, i_time, i_lat, i_lon}) + 1;

  while (std::getline(in, line)) {
    if (trim(line).empty()) {
      continue;
    }
    ++report.rows;
    const auto fields = split_csv_line(line);
    if (fields.size() < needed || fields[i_mmsi].empty()) {
      ++report.malformed;
      continue;
    }
    const auto t = parse_double(fields[i_time]);
    const auto lat = parse_double(fields[i_lat]);
    const auto lon = parse_double(fields[i_lon]);
    if (!t || !lat || !lon || !valid_lat_lon(*lat, *lon)) {
      ++report.malformed;
      continue;
    }
    report.records.push_back({fields[i_mmsi], *t, *lat, *lon});
  }
  if (report.records.empty()) {
    throw InputError("zero valid rows in " + path.string());
  }
  return report;
}

std::map<std::string, std::vector<RawAisRecord>> group_by_vessel(
  const std::vector<RawAisRecord> & records)
{
  std::map<std::string, std::vector<RawAisRecord>> groups;
  for (const auto & r : records) {
    groups[r.mmsi].push_back(r);
  }
  return groups;
}

std::vector<Trajectory> resample_trajectory(
  std::vector<RawAisRecord> records, const ResampleOptions & options)
{
  if (!(options.dt > 0.0) || !(options.gap_max > 0.0)) {
    throw std::invalid_argument("resample_trajectory: dt and gap_max must be positive");
  }
  std::erase_if(records, [](const RawAisRecord & r) {
    return !std::isfinite(r.timestamp) || !valid_lat_lon(r.lat, r.lon);
  });
  std::stable_sort(records.begin(), records.end(), [](const auto & a, const auto & b) {
    return a.timestamp < b.timestamp;
  });
  records.erase(
    std::unique(
      records.begin(), records.end(),
      [](const auto & a, const auto & b) { return a.timestamp == b.timestamp; }),
    records.end());
  if (records.size() < 2) {
    throw InputError("fewer than 2 usable records for vessel");
  }
  const std::string mmsi = records.front().mmsi;

  std::vector<Trajectory> segments;
  std::size_t begin = 0;
  while (begin < records.size()) {
    std::size_t end = begin + 1;
    while (end < records.size() &&
           records[end].timestamp - records[end - 1].timestamp <= options.gap_max) {
      ++end;
    }
    Trajectory segment{mmsi, {}};
    const double t_first = records[begin].timestamp;
    const double t_last = records[end - 1].timestamp;
    std::size_t j = begin;
    for (double n = std::ceil(t_first / options.dt);; n += 1.0) {
      const double t = n * options.dt;
      if (t > t_last) {
        break;
      }
      while (j + 1 < end && records[j + 1].timestamp <= t) {
        ++j;
      }
      const auto & a = records[j];
      if (a.timestamp == t || j + 1 == end) {
        segment.points.push_back({t, a.lat, a.lon});
      } else {
        const auto & b = records[j + 1];
        segment.points.push_back(
          lerp({a.timestamp, a.lat, a.lon}, {b.timestamp, b.lat, b.lon}, t));
      }
    }
    segments.push_back(std::move(segment));
    begin = end;
  }
  return segments;
}

Trajectory clean_anomalies(const Trajectory & trajectory, double v_max)
{
  std::vector<TrajectoryPoint> pts = trajectory.points;
  pts.erase(
    std::unique(pts.begin(), pts.end(), [](const auto & a, const auto & b) { return a.t == b.t; }),
    pts.end());
  if (pts.size() < 3) {
    return {trajectory.mmsi, pts};
  }
  const LatLon origin{pts.front().lat, pts.front().lon};
  const std::size_t n = pts.size();
  auto fast = [&](std::size_t a, std::size_t b) {
    return speed_hm_per_s(pts[a], pts[b], origin) > v_max;
  };

  // Anchor on the first point whose two following segments are both plausible.
  std::size_t anchor = 0;
  while (anchor + 2 < n && (fast(anchor, anchor + 1) || fast(anchor + 1, anchor + 2))) {
    ++anchor;
  }
  if (anchor + 2 >= n) {
    anchor = 0;
  }
  std::vector<bool> keep(n, false);
  keep[anchor] = true;
  for (std::size_t i = anchor + 1, last = anchor; i < n; ++i) {
    if (!fast(last, i)) {
      keep[i] = true;
      last = i;
    }
  }
  for (std::size_t i = anchor, last = anchor; i-- > 0;) {
    if (!fast(i, last)) {
      keep[i] = true;
      last = i;
    }
  }

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) {
      kept.push_back(i);
    }
  }
  Trajectory out{trajectory.mmsi, {}};
  for (std::size_t s = 0; s + 1 < kept.size(); ++s) {
    const auto & a = pts[kept[s]];
    const auto & b = pts[kept[s + 1]];
    out.points.push_back(a);
    for (std::size_t i = kept[s] + 1; i < kept[s + 1]; ++i) {
      out.points.push_back(lerp(a, b, pts[i].t));
    }
  }
  out.points.push_back(pts[kept.back()]);
  return out;
}

TrackReport build_tracks(
  const std::vector<RawAisRecord> & records, const ResampleOptions & options, double v_max)
{
  TrackReport report;
  for (const auto & [mmsi, vessel_records] : group_by_vessel(records)) {
    ++report.vessels;
    std::vector<Trajectory> segments;
    try {
      segments = resample_trajectory(vessel_records, options);
    } catch (const InputError &) {
      ++report.skipped_vessels;
      continue;
    }
    for (auto & segment : segments) {
      Trajectory cleaned = clean_anomalies(segment, v_max);
      if (cleaned.points.size() < 2) {
        ++report.dropped_segments;
        continue;
      }
      report.trajectories.push_back(std::move(cleaned));
    }
  }
  return report;
}

}  // namespace vesselcast
