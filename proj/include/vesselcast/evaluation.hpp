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
#ifndef VESSELCAST__EVALUATION_HPP_
#define VESSELCAST__EVALUATION_HPP_

#include "vesselcast/geo.hpp"
#include "vesselcast/scene.hpp"
#include "vesselcast/tensor.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace vesselcast
{

/// Per-vessel mean Euclidean displacement over the first \p horizon steps
/// (all steps when horizon is 0).
std::vector<double> ade(const Tensor & pred, const Tensor & truth, std::size_t horizon = 0);
/// Per-vessel displacement at step \p horizon (the last step when 0).
std::vector<double> fde(const Tensor & pred, const Tensor & truth, std::size_t horizon = 0);

/// Sampled futures for one scene together with what is needed to score and
/// export them.
struct Prediction
{
  std::string scene_id;
  std::vector<std::string> vessel_ids;
  std::string family;
  LatLon origin;
  double t0 = 0.0;
  Tensor x;
  Tensor truth;
  std::vector<Tensor> samples;
  std::vector<std::uint64_t> seeds;
  std::string config_hash;
  std::string data_hash;

  std::size_t t_pred() const { return truth.dim(2); }
  std::size_t vessels() const { return truth.dim(1); }
  void validate() const;
};

Prediction prediction_from_scene(const Scene & scene, std::vector<Tensor> samples);

struct EvaluationOptions
{
  /// Pick one sample per vessel by ADE and report its FDE, instead of
  /// minimizing both independently.
  bool joint_best = false;
  /// Horizons to score; empty scores the full prediction length.
  std::vector<std::size_t> horizons;
};

struct MetricRow
{
  std::string scene_id;
  std::string vessel;
  std::size_t horizon = 0;
  double ade = 0.0;
  double fde = 0.0;
};

struct HorizonMetrics
{
  double ade = 0.0;
  double fde = 0.0;
};

struct MetricReport
{
  std::map<std::size_t, HorizonMetrics> horizons;
  std::vector<MetricRow> rows;
  std::size_t scene_count = 0;
  std::size_t vessel_count = 0;
  std::size_t n_samples = 0;  // smallest sample count over the scenes
  bool joint_best = false;
  std::string config_hash;
};

/// Best-of-N ADE/FDE per vessel, averaged with equal weight per vessel.
/// Throws on empty input, predictions without samples, or mixed config hashes.
MetricReport best_of_n_evaluate(
  const std::vector<Prediction> & predictions, const EvaluationOptions & options = {});

nlohmann::json metric_report_to_json(const MetricReport & report);

/// Linear extrapolation with the velocity between the last two observed points.
Tensor constant_velocity_baseline(const Tensor & x, std::size_t t_pred);
Tensor constant_velocity_baseline(const Scene & scene);

enum class ExportFormat
{
  kGeoJson,
  kCsv,
  kJson,
};

ExportFormat parse_export_format(const std::string & name);

/// One LineString per sample and vessel plus one per ground-truth vessel,
/// with [lon, lat] coordinates in the scene frame's origin.
nlohmann::json predictions_to_geojson(const std::vector<Prediction> & predictions);
std::string metric_rows_to_csv(const MetricReport & report);

/// Writes \p path in the requested format. Throws std::runtime_error when
/// the path cannot be written.
void export_results(
  const std::vector<Prediction> & predictions, const MetricReport & report, ExportFormat format,
  const std::filesystem::path & path);

nlohmann::json prediction_to_json(const Prediction & p);
Prediction prediction_from_json(const nlohmann::json & j);
void write_predictions_jsonl(
  const std::filesystem::path & path, const std::vector<Prediction> & predictions);
std::vector<Prediction> read_predictions_jsonl(const std::filesystem::path & path);

}  // namespace vesselcast

#endif  // VESSELCAST__EVALUATION_HPP_
