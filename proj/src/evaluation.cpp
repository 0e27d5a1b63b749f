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
#include "vesselcast/evaluation.hpp"

#include "vesselcast/ais.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace vesselcast
{

namespace
{

std::size_t checked_horizon(const Tensor & pred, const Tensor & truth, std::size_t horizon)
{
  require_same_shape(pred, truth, "displacement metric");
  if (pred.rank() != 3 || pred.dim(0) != kFeatures) {
    throw ShapeError("displacement metric expects 2 x V x T arrays, got " +
                     shape_to_string(pred.shape()));
  }
  const std::size_t t = pred.dim(2);
  if (t == 0) {
    throw ShapeError("displacement metric: empty time axis");
  }
  if (horizon == 0) {
    return t;
  }
  if (horizon > t) {
    throw std::invalid_argument(
      "horizon " + std::to_string(horizon) + " exceeds prediction length " + std::to_string(t));
  }
  return horizon;
}

double displacement(const Tensor & a, const Tensor & b, std::size_t v, std::size_t t)
{
  return std::hypot(a.at(0, v, t) - b.at(0, v, t), a.at(1, v, t) - b.at(1, v, t));
}

}  // namespace

std::vector<double> ade(const Tensor & pred, const Tensor & truth, std::size_t horizon)
{
  const std::size_t h = checked_horizon(pred, truth, horizon);
  std::vector<double> out(pred.dim(1), 0.0);
  for (std::size_t v = 0; v < out.size(); ++v) {
    for (std::size_t t = 0; t < h; ++t) {
      out[v] += displacement(pred, truth, v, t);
    }
    out[v] /= static_cast<double>(h);
  }
  return out;
}

std::vector<double> fde(const Tensor & pred, const Tensor & truth, std::size_t horizon)
{
  const std::size_t h = checked_horizon(pred, truth, horizon);
  std::vector<double> out(pred.dim(1), 0.0);
  for (std::size_t v = 0; v < out.size(); ++v) {
    out[v] = displacement(pred, truth, v, h - 1);
  }
  return out;
}

void Prediction::validate() const
{
  if (truth.rank() != 3 || truth.dim(0) != kFeatures) {
    throw ShapeError("prediction " + scene_id + ": truth must be 2 x V x T_pred");
  }
  if (!vessel_ids.empty() && vessel_ids.size() != truth.dim(1)) {
    throw ShapeError("prediction " + scene_id + ": vessel id count does not match truth");
  }
  if (!truth.all_finite()) {
    throw std::invalid_argument("prediction " + scene_id + ": non-finite truth");
  }
  for (const auto & s : samples) {
    require_same_shape(s, truth, "prediction " + scene_id);
    if (!s.all_finite()) {
      throw std::invalid_argument("prediction " + scene_id + ": non-finite sample");
    }
  }
  if (!seeds.empty() && seeds.size() != samples.size()) {
    throw std::invalid_argument("prediction " + scene_id + ": seed count does not match samples");
  }
}

Prediction prediction_from_scene(const Scene & scene, std::vector<Tensor> samples)
{
  Prediction p;
  p.scene_id = scene.id;
  p.vessel_ids = scene.vessel_ids;
  p.family = scene.family;
  p.origin = scene.origin;
  p.t0 = scene.t0;
  p.x = scene.x;
  p.truth = scene.y;
  p.samples = std::move(samples);
  p.data_hash = scene.data_hash;
  return p;
}

MetricReport best_of_n_evaluate(
  const std::vector<Prediction> & predictions, const EvaluationOptions & options)
{
  if (predictions.empty()) {
    throw InputError("no predictions to evaluate");
  }
  MetricReport report;
  report.joint_best = options.joint_best;
  report.config_hash = predictions.front().config_hash;
  report.n_samples = std::numeric_limits<std::size_t>::max();
  for (const auto & p : predictions) {
    p.validate();
    if (p.samples.empty()) {
      throw InputError("prediction " + p.scene_id + " has no samples");
    }
    if (p.config_hash != report.config_hash) {
      throw InputError(
        "predictions mix config hashes " + report.config_hash + " and " + p.config_hash);
    }
    report.n_samples = std::min(report.n_samples, p.samples.size());
  }

  std::set<std::size_t> horizons(options.horizons.begin(), options.horizons.end());
  if (horizons.empty()) {
    for (const auto & p : predictions) {
      horizons.insert(p.t_pred());
    }
  }
  std::map<std::size_t, std::size_t> counts;
  for (const auto & p : predictions) {
    report.vessel_count += p.vessels();
    for (const std::size_t h : horizons) {
      if (h == 0 || h > p.t_pred()) {
        if (options.horizons.empty()) {
          continue;
        }
        throw std::invalid_argument(
          "horizon " + std::to_string(h) + " exceeds prediction length " +
          std::to_string(p.t_pred()) + " of scene " + p.scene_id);
      }
      const std::size_t v_count = p.vessels();
      std::vector<double> best_ade(v_count, std::numeric_limits<double>::infinity());
      std::vector<double> best_fde(v_count, std::numeric_limits<double>::infinity());
      for (const auto & s : p.samples) {
        const auto a = ade(s, p.truth, h);
        const auto f = fde(s, p.truth, h);
        for (std::size_t v = 0; v < v_count; ++v) {
          if (options.joint_best) {
            if (a[v] < best_ade[v]) {
              best_ade[v] = a[v];
              best_fde[v] = f[v];
            }
          } else {
            best_ade[v] = std::min(best_ade[v], a[v]);
            best_fde[v] = std::min(best_fde[v], f[v]);
          }
        }
      }
      auto & agg = report.horizons[h];
      for (std::size_t v = 0; v < v_count; ++v) {
        agg.ade += best_ade[v];
        agg.fde += best_fde[v];
        const std::string vessel = p.vessel_ids.empty() ? std::to_string(v) : p.vessel_ids[v];
        report.rows.push_back({p.scene_id, vessel, h, best_ade[v], best_fde[v]});
      }
      counts[h] += v_count;
    }
  }
  for (auto & [h, m] : report.horizons) {
    m.ade /= static_cast<double>(counts[h]);
    m.fde /= static_cast<double>(counts[h]);
  }
  report.scene_count = predictions.size();
  return report;
}

nlohmann::json metric_report_to_json(const MetricReport & report)
{
  nlohmann::json by_horizon = nlohmann::json::object();
  for (const auto & [h, m] : report.horizons) {
    by_horizon[std::to_string(h)] = {{"ade", m.ade}, {"fde", m.fde}};
  }
  return {
    {"horizons", std::move(by_horizon)},
    {"scene_count", report.scene_count},
    {"vessel_count", report.vessel_count},
    {"n_samples", report.n_samples},
    {"joint_best", report.joint_best},
    {"units", "hm"},
    {"config_hash", report.config_hash}};
}

Tensor constant_velocity_baseline(const Tensor & x, std::size_t t_pred)
{
  if (x.rank() != 3 || x.dim(2) < 2) {
    throw std::invalid_argument("constant-velocity baseline needs at least two observed steps");
  }
  const std::size_t f_count = x.dim(0);
  const std::size_t v_count = x.dim(1);
  const std::size_t last = x.dim(2) - 1;
  Tensor out({f_count, v_count, t_pred});
  for (std::size_t f = 0; f < f_count; ++f) {
    for (std::size_t v = 0; v < v_count; ++v) {
      const double p = x.at(f, v, last);
      const double vel = p - x.at(f, v, last - 1);
      for (std::size_t t = 0; t < t_pred; ++t) {
        out.at(f, v, t) = p + vel * static_cast<double>(t + 1);
      }
    }
  }
  return out;
}

Tensor constant_velocity_baseline(const Scene & scene)
{
  return constant_velocity_baseline(scene.x, scene.t_pred());
}

ExportFormat parse_export_format(const std::string & name)
{
  if (name == "geojson") {
    return ExportFormat::kGeoJson;
  }
  if (name == "csv") {
    return ExportFormat::kCsv;
  }
  if (name == "json") {
    return ExportFormat::kJson;
  }
  throw InputError("unknown export format '" + name + "' (geojson, csv, json)");
}

namespace
{

nlohmann::json line_string(const Tensor & track, std::size_t v, const LatLon & origin)
{
  nlohmann::json coords = nlohmann::json::array();
  for (std::size_t t = 0; t < track.dim(2); ++t) {
    const LatLon ll = from_local_coords({track.at(0, v, t), track.at(1, v, t)}, origin);
    coords.push_back({ll.lon, ll.lat});
  }
  return {{"type", "LineString"}, {"coordinates", std::move(coords)}};
}

}  // namespace

nlohmann::json predictions_to_geojson(const std::vector<Prediction> & predictions)
{
  nlohmann::json features = nlohmann::json::array();
  for (const auto & p : predictions) {
    p.validate();
    for (std::size_t v = 0; v < p.vessels(); ++v) {
      const std::string vessel = p.vessel_ids.empty() ? std::to_string(v) : p.vessel_ids[v];
      for (std::size_t s = 0; s < p.samples.size(); ++s) {
        features.push_back(
          {{"type", "Feature"},
           {"geometry", line_string(p.samples[s], v, p.origin)},
           {"properties", {{"scene_id", p.scene_id}, {"vessel", vessel}, {"kind", "prediction"},
                           {"sample", s}}}});
      }
      features.push_back(
        {{"type", "Feature"},
         {"geometry", line_string(p.truth, v, p.origin)},
         {"properties", {{"scene_id", p.scene_id}, {"vessel", vessel}, {"kind", "truth"}}}});
    }
  }
  return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

std::string metric_rows_to_csv(const MetricReport & report)
{
  std::ostringstream out;
  out << std::setprecision(17);
  out << "scene_id,vessel,horizon,ade,fde\n";
  for (const auto & r : report.rows) {
    out << r.scene_id << ',' << r.vessel << ',' << r.horizon << ',' << r.ade << ',' << r.fde << '\n';
  }
  return out.str();
}

void export_results(
  const std::vector<Prediction> & predictions, const MetricReport & report, ExportFormat format,
  const std::filesystem::path & path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  switch (format) {
    case ExportFormat::kGeoJson:
      out << predictions_to_geojson(predictions).dump(1) << '\n';
      break;
    case ExportFormat::kCsv:
      out << metric_rows_to_csv(report);
      break;
    case ExportFormat::kJson:
      out << metric_report_to_json(report).dump(2) << '\n';
      break;
  }
  if (!out) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

nlohmann::json prediction_to_json(const Prediction & p)
{
  nlohmann::json samples = nlohmann::json::array();
  for (const auto & s : p.samples) {
    samples.push_back(tensor3_to_json(s));
  }
  return {
    {"scene_id", p.scene_id},
    {"vessels", p.vessel_ids},
    {"family", p.family},
    {"origin", {p.origin.lat, p.origin.lon}},
    {"t0", p.t0},
    {"x", tensor3_to_json(p.x)},
    {"truth", tensor3_to_json(p.truth)},
    {"seeds", p.seeds},
    {"samples", std::move(samples)},
    {"config_hash", p.config_hash},
    {"data_hash", p.data_hash}};
}

Prediction prediction_from_json(const nlohmann::json & j)
{
  Prediction p;
  p.scene_id = j.at("scene_id").get<std::string>();
  p.vessel_ids = j.at("vessels").get<std::vector<std::string>>();
  p.family = j.value("family", std::string{});
  const auto & o = j.at("origin");
  p.origin = {o.at(0).get<double>(), o.at(1).get<double>()};
  p.t0 = j.at("t0").get<double>();
  p.x = tensor3_from_json(j.at("x"));
  p.truth = tensor3_from_json(j.at("truth"));
  p.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  for (const auto & s : j.at("samples")) {
    p.samples.push_back(tensor3_from_json(s));
  }
  p.config_hash = j.value("config_hash", std::string{});
  p.data_hash = j.value("data_hash", std::string{});
  p.validate();
  return p;
}

void write_predictions_jsonl(
  const std::filesystem::path & path, const std::vector<Prediction> & predictions)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError("cannot write " + path.string());
  }
  for (const auto & p : predictions) {
    out << prediction_to_json(p).dump() << '\n';
  }
}

std::vector<Prediction> read_predictions_jsonl(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open predictions file: " + path.string());
  }
  std::vector<Prediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    try {
      out.push_back(prediction_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception & e) {
      throw InputError(
        path.string() + ":" + std::to_string(line_no) + ": invalid prediction: " + e.what());
    }
  }
  return out;
}

}  // namespace vesselcast
