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
#include "oracles.hpp"
#include "test_support.hpp"

#include "vesselcast/evaluation.hpp"
#include "vesselcast/synthetic.hpp"

#include <algorithm>
#include <cmath>

namespace vesselcast
{
namespace
{

Prediction random_prediction(Rng & rng, std::size_t v, std::size_t t, std::size_t n)
{
  Prediction p;
  p.scene_id = "s" + std::to_string(rng.uniform_int(0, 1 << 20));
  p.origin = {38.9, 118.4};
  p.x = test::random_tensor({2, v, 4}, rng, 5.0);
  p.truth = test::random_tensor({2, v, t}, rng, 5.0);
  for (std::size_t s = 0; s < n; ++s) {
    p.samples.push_back(test::random_tensor({2, v, t}, rng, 5.0));
  }
  p.config_hash = "abc";
  return p;
}

TEST(Ade, IdentityAndConstantOffset)
{
  Rng rng(1);
  const Tensor truth = test::random_tensor({2, 3, 6}, rng);
  for (double e : ade(truth, truth)) {
    EXPECT_EQ(e, 0.0);
  }
  Tensor shifted = truth;
  for (std::size_t v = 0; v < 3; ++v) {
    for (std::size_t t = 0; t < 6; ++t) {
      shifted.at(0, v, t) += 1.0;
    }
  }
  for (double e : ade(shifted, truth)) {
    EXPECT_NEAR(e, 1.0, 1e-12);
  }
}

TEST(Fde, FinalStepOffset)
{
  Rng rng(2);
  const Tensor truth = test::random_tensor({2, 2, 5}, rng);
  Tensor pred = truth;
  pred.at(1, 0, 4) += 2.0;
  pred.at(1, 1, 4) += 2.0;
  const auto f = fde(pred, truth);
  const auto a = ade(pred, truth);
  for (std::size_t v = 0; v < 2; ++v) {
    EXPECT_NEAR(f[v], 2.0, 1e-12);
    EXPECT_NEAR(a[v], 2.0 / 5.0, 1e-12);
  }
}

TEST(Metrics, MatchLoopOracles)
{
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto v = static_cast<std::size_t>(rng.uniform_int(1, 4));
    const auto t = static_cast<std::size_t>(rng.uniform_int(1, 8));
    const Tensor pred = test::random_tensor({2, v, t}, rng, 3.0);
    const Tensor truth = test::random_tensor({2, v, t}, rng, 3.0);
    const auto a = ade(pred, truth);
    const auto f = fde(pred, truth);
    for (std::size_t i = 0; i < v; ++i) {
      ASSERT_NEAR(a[i], oracle::ade(pred, truth, i), 1e-12);
      ASSERT_NEAR(f[i], oracle::fde(pred, truth, i), 1e-12);
      ASSERT_GE(a[i], 0.0);
      ASSERT_GE(f[i], 0.0);
    }
  }
}

TEST(Metrics, HorizonTruncates)
{
  Rng rng(4);
  const Tensor pred = test::random_tensor({2, 2, 6}, rng);
  const Tensor truth = test::random_tensor({2, 2, 6}, rng);
  Tensor p3({2, 2, 3});
  Tensor t3({2, 2, 3});
  for (std::size_t f = 0; f < 2; ++f) {
    for (std::size_t v = 0; v < 2; ++v) {
      for (std::size_t t = 0; t < 3; ++t) {
        p3.at(f, v, t) = pred.at(f, v, t);
        t3.at(f, v, t) = truth.at(f, v, t);
      }
    }
  }
  EXPECT_EQ(ade(pred, truth, 3), ade(p3, t3));
  EXPECT_EQ(fde(pred, truth, 3), fde(p3, t3));
}

TEST(Metrics, TranslationInvariant)
{
  Rng rng(5);
  const Tensor pred = test::random_tensor({2, 3, 4}, rng);
  const Tensor truth = test::random_tensor({2, 3, 4}, rng);
  Tensor pm = pred;
  Tensor tm = truth;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double shift = i < pred.size() / 2 ? 123.25 : -40.5;
    pm[i] += shift;
    tm[i] += shift;
  }
  const auto a0 = ade(pred, truth);
  const auto a1 = ade(pm, tm);
  for (std::size_t v = 0; v < 3; ++v) {
    EXPECT_NEAR(a0[v], a1[v], 1e-12);
  }
}

TEST(Metrics, RejectShapeMismatch)
{
  EXPECT_THROW(ade(Tensor({2, 2, 3}), Tensor({2, 2, 4})), ShapeError);
  EXPECT_THROW(fde(Tensor({2, 1, 3}), Tensor({2, 2, 3})), ShapeError);
}

TEST(BestOfN, MatchesExhaustiveOracle)
{
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Prediction> preds;
    const int scenes = rng.uniform_int(1, 3);
    const auto t = static_cast<std::size_t>(rng.uniform_int(1, 6));
    for (int s = 0; s < scenes; ++s) {
      preds.push_back(
        random_prediction(rng, static_cast<std::size_t>(rng.uniform_int(1, 3)), t, 20));
    }
    std::vector<std::vector<Tensor>> samples;
    std::vector<Tensor> truths;
    for (const auto & p : preds) {
      samples.push_back(p.samples);
      truths.push_back(p.truth);
    }
    const auto [ref_ade, ref_fde] = oracle::best_of_n(samples, truths);
    const MetricReport report = best_of_n_evaluate(preds);
    ASSERT_EQ(report.rows.size(), report.vessel_count);
    ASSERT_NEAR(report.horizons.at(t).ade, ref_ade, 1e-12);
    ASSERT_NEAR(report.horizons.at(t).fde, ref_fde, 1e-12);
  }
}

TEST(BestOfN, MixedLengthsScoreEveryFittingHorizon)
{
  Rng rng(19);
  const std::vector<Prediction> preds{random_prediction(rng, 1, 5, 2), random_prediction(rng, 2, 10, 2)};
  const MetricReport report = best_of_n_evaluate(preds);
  ASSERT_EQ(report.horizons.size(), 2U);
  EXPECT_EQ(report.rows.size(), 1U + 2U + 2U);  // horizon 5 for both, 10 for the longer
  const auto a = ade(preds[0].samples[0], preds[0].truth);
  const auto b = ade(preds[0].samples[1], preds[0].truth);
  EXPECT_NEAR(report.rows.front().ade, std::min(a[0], b[0]), 1e-12);
}

TEST(BestOfN, SharedHorizonAveragesOverVessels)
{
  Rng rng(7);
  std::vector<Prediction> preds{random_prediction(rng, 1, 5, 4), random_prediction(rng, 3, 5, 4)};
  const MetricReport report = best_of_n_evaluate(preds);
  const auto [ref_ade, ref_fde] =
    oracle::best_of_n({preds[0].samples, preds[1].samples}, {preds[0].truth, preds[1].truth});
  ASSERT_EQ(report.horizons.size(), 1U);
  EXPECT_NEAR(report.horizons.at(5).ade, ref_ade, 1e-12);
  EXPECT_NEAR(report.horizons.at(5).fde, ref_fde, 1e-12);
  EXPECT_EQ(report.scene_count, 2U);
  EXPECT_EQ(report.vessel_count, 4U);
  EXPECT_EQ(report.n_samples, 4U);
}

TEST(BestOfN, PerfectMemberGivesZero)
{
  Rng rng(8);
  Prediction p = random_prediction(rng, 2, 6, 20);
  p.samples[13] = p.truth;
  const MetricReport report = best_of_n_evaluate({p});
  EXPECT_EQ(report.horizons.at(6).ade, 0.0);
  EXPECT_EQ(report.horizons.at(6).fde, 0.0);
}

TEST(BestOfN, IdenticalSamplesEqualSingleSample)
{
  Rng rng(9);
  Prediction p = random_prediction(rng, 2, 6, 1);
  const MetricReport single = best_of_n_evaluate({p});
  p.samples.assign(20, p.samples.front());
  const MetricReport many = best_of_n_evaluate({p});
  EXPECT_EQ(single.horizons.at(6).ade, many.horizons.at(6).ade);
  EXPECT_EQ(single.horizons.at(6).fde, many.horizons.at(6).fde);
}

TEST(BestOfN, MonotoneUnderSampleAddition)
{
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    Prediction p = random_prediction(rng, 2, 4, 1);
    double last_ade = best_of_n_evaluate({p}).horizons.at(4).ade;
    double last_fde = best_of_n_evaluate({p}).horizons.at(4).fde;
    for (int add = 0; add < 5; ++add) {
      p.samples.push_back(test::random_tensor({2, 2, 4}, rng, 5.0));
      const MetricReport r = best_of_n_evaluate({p});
      ASSERT_LE(r.horizons.at(4).ade, last_ade);
      ASSERT_LE(r.horizons.at(4).fde, last_fde);
      last_ade = r.horizons.at(4).ade;
      last_fde = r.horizons.at(4).fde;
    }
  }
}

TEST(BestOfN, JointSelectionUsesOneSample)
{
  Prediction p;
  p.scene_id = "j";
  p.truth = Tensor({2, 1, 2});
  // Sample a: small ADE, large FDE. Sample b: larger ADE, zero FDE.
  p.samples.push_back(Tensor({2, 1, 2}, {0.0, 1.0, 0.0, 0.0}));
  p.samples.push_back(Tensor({2, 1, 2}, {3.0, 0.0, 0.0, 0.0}));
  const auto independent = best_of_n_evaluate({p}).horizons.at(2);
  EXPECT_DOUBLE_EQ(independent.ade, 0.5);
  EXPECT_DOUBLE_EQ(independent.fde, 0.0);
  const auto joint = best_of_n_evaluate({p}, {true, {}}).horizons.at(2);
  EXPECT_DOUBLE_EQ(joint.ade, 0.5);
  EXPECT_DOUBLE_EQ(joint.fde, 1.0);
}

TEST(BestOfN, HorizonsAndErrors)
{
  Rng rng(11);
  const Prediction p = random_prediction(rng, 2, 15, 3);
  const MetricReport r = best_of_n_evaluate({p}, {false, {5, 10, 15}});
  EXPECT_EQ(r.horizons.size(), 3U);
  EXPECT_LE(r.horizons.at(5).ade, 1e9);
  EXPECT_THROW(best_of_n_evaluate({p}, {false, {16}}), std::invalid_argument);
  EXPECT_THROW(best_of_n_evaluate({}), InputError);
  Prediction empty = p;
  empty.samples.clear();
  EXPECT_THROW(best_of_n_evaluate({empty}), InputError);
  Prediction other = p;
  other.config_hash = "zzz";
  EXPECT_THROW(best_of_n_evaluate({p, other}), InputError);
}

TEST(BestOfN, ReportJson)
{
  Rng rng(12);
  const MetricReport r = best_of_n_evaluate({random_prediction(rng, 2, 5, 7)});
  const nlohmann::json j = metric_report_to_json(r);
  EXPECT_EQ(j["n_samples"], 7);
  EXPECT_EQ(j["config_hash"], "abc");
  EXPECT_EQ(j["units"], "hm");
  EXPECT_TRUE(j["horizons"]["5"].contains("ade"));
  EXPECT_TRUE(j["horizons"]["5"].contains("fde"));
}

TEST(ConstantVelocity, StationaryVessel)
{
  Tensor x({2, 1, 4}, 3.5);
  const Tensor y = constant_velocity_baseline(x, 6);
  for (double v : y.values()) {
    EXPECT_EQ(v, 3.5);
  }
}

TEST(ConstantVelocity, ExactOnStraightMotion)
{
  SyntheticConfig syn;
  syn.families = {"constant-velocity"};
  syn.scenes_per_family = 3;
  for (const Scene & s : generate_synthetic_scenes(syn, 13).scenes) {
    for (double e : ade(constant_velocity_baseline(s), s.y)) {
      EXPECT_NEAR(e, 0.0, 1e-9);
    }
    for (double e : fde(constant_velocity_baseline(s), s.y)) {
      EXPECT_NEAR(e, 0.0, 1e-9);
    }
  }
}

TEST(ConstantVelocity, ArcVersusTangentGap)
{
  for (const double omega : {0.05, 0.1, -0.2}) {
    const double speed = 0.4;
    VesselMotion m;
    m.position = {2.0, -1.0};
    m.heading = 0.7;
    m.speed = m.speed_after = speed;
    m.turn_rate = m.turn_rate_after = omega;
    const Scene s = scene_from_motions({m}, 10, 15, 0.0, nullptr, {38.9, 118.4});
    const auto a = ade(constant_velocity_baseline(s), s.y);
    const auto f = fde(constant_velocity_baseline(s), s.y);
    // With the last observed point at angle 0 on a circle of radius R:
    // truth R(cos wh, sin wh), extrapolation (R + hR(1 - cos w), hR sin w).
    const double r = speed / std::abs(omega);
    const double w = std::abs(omega);
    auto gap = [&](double h) {
      const double dx = 1.0 + h * (1.0 - std::cos(w)) - std::cos(w * h);
      const double dy = h * std::sin(w) - std::sin(w * h);
      return r * std::sqrt(dx * dx + dy * dy);
    };
    double mean = 0.0;
    for (int h = 1; h <= 15; ++h) {
      mean += gap(h);
    }
    mean /= 15.0;
    EXPECT_GT(a[0], 0.0);
    EXPECT_NEAR(a[0], mean, 1e-9);
    EXPECT_NEAR(f[0], gap(15), 1e-9);
  }
}

TEST(ConstantVelocity, NeedsTwoObservations)
{
  EXPECT_THROW(constant_velocity_baseline(Tensor({2, 1, 1}), 3), std::invalid_argument);
}

class Export : public ::testing::Test
{
protected:
  test::TempDir dir;
};

TEST_F(Export, GeoJsonFeatureCount)
{
  Rng rng(14);
  Prediction p = random_prediction(rng, 2, 5, 1);
  p.vessel_ids = {"111", "222"};
  const nlohmann::json g = predictions_to_geojson({p});
  EXPECT_EQ(g["type"], "FeatureCollection");
  ASSERT_EQ(g["features"].size(), 4U);
  int predicted = 0;
  int truth = 0;
  for (const auto & f : g["features"]) {
    EXPECT_EQ(f["geometry"]["type"], "LineString");
    EXPECT_EQ(f["geometry"]["coordinates"].size(), 5U);
    (f["properties"]["kind"] == "truth" ? truth : predicted)++;
  }
  EXPECT_EQ(predicted, 2);
  EXPECT_EQ(truth, 2);
}

TEST_F(Export, GeoJsonCoordinatesRoundTrip)
{
  Rng rng(15);
  Prediction p = random_prediction(rng, 2, 6, 3);
  const auto path = dir.path() / "out.geojson";
  export_results({p}, best_of_n_evaluate({p}), ExportFormat::kGeoJson, path);
  const nlohmann::json g = nlohmann::json::parse(test::read_file(path));
  for (const auto & f : g["features"]) {
    const std::size_t v = std::stoul(f["properties"]["vessel"].get<std::string>());
    const Tensor & src = f["properties"]["kind"] == "truth"
                           ? p.truth
                           : p.samples[f["properties"]["sample"].get<std::size_t>()];
    const auto & coords = f["geometry"]["coordinates"];
    for (std::size_t t = 0; t < coords.size(); ++t) {
      const LatLon ll{coords[t][1].get<double>(), coords[t][0].get<double>()};
      const LocalXY back = to_local_coords(ll, p.origin);
      EXPECT_NEAR(back.x, src.at(0, v, t), 1e-9);
      EXPECT_NEAR(back.y, src.at(1, v, t), 1e-9);
    }
  }
}

TEST_F(Export, CsvHeaderAndRows)
{
  Rng rng(16);
  Prediction p = random_prediction(rng, 3, 4, 2);
  const auto path = dir.path() / "m.csv";
  export_results({p}, best_of_n_evaluate({p}), ExportFormat::kCsv, path);
  const std::string text = test::read_file(path);
  EXPECT_EQ(text.substr(0, text.find('\n')), "scene_id,vessel,horizon,ade,fde");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

TEST_F(Export, FormatsAndErrors)
{
  EXPECT_EQ(parse_export_format("geojson"), ExportFormat::kGeoJson);
  EXPECT_EQ(parse_export_format("csv"), ExportFormat::kCsv);
  EXPECT_EQ(parse_export_format("json"), ExportFormat::kJson);
  EXPECT_THROW(parse_export_format("xml"), InputError);
  Rng rng(17);
  const Prediction p = random_prediction(rng, 1, 3, 1);
  EXPECT_THROW(export_results({p}, best_of_n_evaluate({p}), ExportFormat::kJson,
                              dir.path() / "missing" / "dir" / "x.json"),
               std::runtime_error);
}

TEST_F(Export, PredictionJsonLinesRoundTrip)
{
  Rng rng(18);
  std::vector<Prediction> preds{random_prediction(rng, 2, 5, 3), random_prediction(rng, 1, 5, 2)};
  preds[0].seeds = {1, 2, 3};
  preds[0].vessel_ids = {"a", "b"};
  const auto path = dir.path() / "p.jsonl";
  write_predictions_jsonl(path, preds);
  const auto back = read_predictions_jsonl(path);
  ASSERT_EQ(back.size(), 2U);
  EXPECT_EQ(back[0].samples, preds[0].samples);
  EXPECT_EQ(back[0].truth, preds[0].truth);
  EXPECT_EQ(back[0].seeds, preds[0].seeds);
  EXPECT_EQ(back[0].vessel_ids, preds[0].vessel_ids);
  EXPECT_EQ(back[1].x, preds[1].x);
  EXPECT_EQ(back[1].config_hash, "abc");
}

}  // namespace
}  // namespace vesselcast
