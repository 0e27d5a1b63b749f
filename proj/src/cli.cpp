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
#include "vesselcast/cli.hpp"

#include "vesselcast/ais.hpp"
#include "vesselcast/synthetic.hpp"
#include "vesselcast/training.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace vesselcast
{

namespace fs = std::filesystem;

namespace
{

std::vector<std::string> split_list(const std::string & text)
{
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) {
      out.push_back(item.substr(b, e - b + 1));
    }
  }
  return out;
}

std::string read_bytes(const fs::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// The config document with command-line overrides applied on top.
RunConfig config_for(
  const std::string & path, const std::optional<std::uint64_t> & seed,
  const std::optional<int> & threads)
{
  nlohmann::json doc = nlohmann::json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) {
      throw ConfigError("cannot open config file: " + path);
    }
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error & e) {
      throw ConfigError("config " + path + ": " + e.what());
    }
    if (!doc.is_object()) {
      throw ConfigError("config: top level must be a JSON object");
    }
  }
  if (seed) {
    doc["run"]["seed"] = *seed;
  }
  if (threads) {
    doc["run"]["threads"] = *threads;
  }
  return resolve_config(doc, environment_overrides());
}

std::vector<Scene> select_split(const std::vector<Scene> & scenes, const std::string & split)
{
  if (split == "all") {
    return scenes;
  }
  std::vector<Scene> out;
  for (const auto & s : scenes) {
    if (s.split == split) {
      out.push_back(s);
    }
  }
  return out;
}

/// Scenes of \p preferred, or every scene when that split is empty.
std::vector<Scene> split_or_all(const std::vector<Scene> & scenes, const std::string & preferred)
{
  auto chosen = select_split(scenes, preferred);
  return chosen.empty() ? scenes : chosen;
}

void write_text(const fs::path & path, const std::string & text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError("cannot write " + path.string());
  }
  out << text;
}

RunConfig variant_config(const RunConfig & base, const AblationVariant & v)
{
  nlohmann::json doc = base.document;
  doc["denoiser"]["disable_unet"] = !v.unet;
  doc["denoiser"]["disable_dgc"] = !v.dgc;
  doc["denoiser"]["disable_residual"] = !v.residual;
  doc["graph"]["tau"] = tau_to_json(v.tau);
  return resolve_config(doc);
}

}  // namespace

std::string scenes_data_hash(const std::vector<Scene> & scenes)
{
  std::string hash;
  for (const auto & s : scenes) {
    if (s.data_hash.empty()) {
      continue;
    }
    if (hash.empty()) {
      hash = s.data_hash;
    } else if (hash != s.data_hash) {
      throw InputError("scenes mix data hashes " + hash + " and " + s.data_hash);
    }
  }
  return hash;
}

std::vector<AblationVariant> toggle_ladder(
  const std::vector<std::string> & toggles, InteractionBoundary tau)
{
  AblationVariant row;
  row.kind = "toggle";
  row.tau = tau;
  for (const auto & t : toggles) {
    if (t == "unet") {
      row.unet = false;
    } else if (t == "dgc") {
      row.dgc = false;
    } else if (t == "res") {
      row.residual = false;
    } else {
      throw InputError("unknown toggle '" + t + "' (expected unet, dgc or res)");
    }
  }
  row.name = "none";
  std::vector<AblationVariant> out{row};
  std::string name;
  for (const auto & t : toggles) {
    (t == "unet" ? row.unet : t == "dgc" ? row.dgc : row.residual) = true;
    name += name.empty() ? t : "+" + t;
    row.name = name;
    out.push_back(row);
  }
  return out;
}

std::vector<AblationVariant> tau_sweep(const std::vector<InteractionBoundary> & taus)
{
  std::vector<AblationVariant> out;
  for (const auto & tau : taus) {
    AblationVariant v;
    v.kind = "tau";
    v.tau = tau;
    v.name = tau_to_json(tau).dump();
    if (!tau) {
      v.name = "none";
    }
    out.push_back(v);
  }
  return out;
}

std::vector<InteractionBoundary> parse_tau_list(const std::string & text)
{
  std::vector<InteractionBoundary> out;
  for (const auto & item : split_list(text)) {
    if (item == "none" || item == "None") {
      out.emplace_back(std::nullopt);
      continue;
    }
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used != item.size() || !(value > 0.0)) {
      throw InputError("invalid tau value '" + item + "' (positive number or none)");
    }
    out.emplace_back(value);
  }
  if (out.empty()) {
    throw InputError("empty tau sweep");
  }
  return out;
}

std::vector<Prediction> predict_scenes(
  const Checkpoint & ckpt, const std::vector<Scene> & scenes, std::size_t n_samples,
  std::uint64_t seed, int threads)
{
  const TrajUGnet net(ckpt.denoiser);
  std::vector<Prediction> out;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const Scene & scene = scenes[i];
    Rng rng(derive_seed(seed, 2, i));
    SamplingResult r = forecast_scene(ckpt, net, scene, n_samples, rng, threads);
    if (r.samples.empty()) {
      throw NumericalError(
        "every sample diverged for scene " + scene.id +
        (r.diagnostics.empty() ? std::string{} : ": " + r.diagnostics.front()));
    }
    Prediction p = prediction_from_scene(scene, std::move(r.samples));
    p.seeds = std::move(r.seeds);
    p.config_hash = ckpt.config_hash;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<AblationRow> run_ablation(
  const RunConfig & base, const std::vector<Scene> & train_scenes,
  const std::vector<Scene> & eval_scenes, const std::vector<AblationVariant> & variants)
{
  std::vector<AblationRow> rows;
  for (const auto & v : variants) {
    const RunConfig cfg = variant_config(base, v);
    TrainResult trained = train(train_scenes, cfg.train_setup());
    trained.checkpoint.config_hash = cfg.hash;
    const auto preds =
      predict_scenes(trained.checkpoint, eval_scenes, cfg.n_samples, cfg.seed, cfg.threads);
    EvaluationOptions options = cfg.evaluation;
    options.horizons.clear();
    const MetricReport report = best_of_n_evaluate(preds, options);
    const HorizonMetrics m = report.horizons.rbegin()->second;
    rows.push_back({v, m.ade, m.fde, cfg.hash});
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow> & rows)
{
  std::ostringstream out;
  out << std::setprecision(17);
  out << "kind,variant,unet,dgc,residual,tau,ade,fde,config_hash\n";
  for (const auto & r : rows) {
    const auto & v = r.variant;
    out << v.kind << ',' << v.name << ',' << v.unet << ',' << v.dgc << ',' << v.residual << ','
        << (v.tau ? tau_to_json(v.tau).dump() : "none") << ',' << r.ade << ',' << r.fde << ','
        << r.config_hash << '\n';
  }
  return out.str();
}

int run_cli(const std::vector<std::string> & args, std::ostream & out, std::ostream & err)
{
  CLI::App app{"Multi-vessel trajectory forecasting with graph-conditioned diffusion", "vesselcast"};
  app.require_subcommand(1);
  std::optional<int> threads;
  app.add_option("--threads", threads, "Worker threads (overrides run.threads)");

  std::string config_path;
  std::optional<std::uint64_t> seed;

  // preprocess
  auto * pre = app.add_subcommand("preprocess", "Clean AIS records and extract interaction scenes");
  std::string csv_path, scenes_out;
  pre->add_option("--input", csv_path, "AIS CSV file")->required();
  pre->add_option("--out", scenes_out, "Scenes JSON-lines output")->required();
  pre->add_option("--config", config_path, "Run config JSON");

  // synth
  auto * syn = app.add_subcommand("synth", "Generate synthetic interaction scenes");
  std::string synth_out;
  syn->add_option("--out", synth_out, "Scenes JSON-lines output")->required();
  syn->add_option("--config", config_path, "Run config JSON");
  syn->add_option("--seed", seed, "Seed (overrides run.seed)");

  // train
  auto * trn = app.add_subcommand("train", "Train the denoiser");
  std::string train_scenes, ckpt_out, log_out, train_split = "train";
  trn->add_option("--scenes", train_scenes, "Scenes JSON-lines")->required();
  trn->add_option("--config", config_path, "Run config JSON");
  trn->add_option("--out", ckpt_out, "Checkpoint output")->required();
  trn->add_option("--log", log_out, "Training log (default: <out>.log.jsonl)");
  trn->add_option("--seed", seed, "Seed (overrides run.seed)");
  trn->add_option("--split", train_split, "Scene split to train on (train, val, test, all)");

  // predict
  auto * prd = app.add_subcommand("predict", "Sample future trajectories");
  std::string ckpt_in, predict_scenes_path, preds_out, predict_split = "all";
  std::optional<std::size_t> n_samples;
  prd->add_option("--ckpt", ckpt_in, "Checkpoint")->required();
  prd->add_option("--scenes", predict_scenes_path, "Scenes JSON-lines")->required();
  prd->add_option("--n", n_samples, "Samples per scene (default: evaluation.n_samples)");
  prd->add_option("--out", preds_out, "Predictions JSON-lines output")->required();
  prd->add_option("--seed", seed, "Sampling seed (default: the training seed)");
  prd->add_option("--split", predict_split, "Scene split to predict (train, val, test, all)");

  // evaluate
  auto * evl = app.add_subcommand("evaluate", "Best-of-N ADE/FDE report");
  std::string preds_in, report_out, geojson_dir, csv_out, horizons_text;
  bool joint_best = false;
  evl->add_option("--preds", preds_in, "Predictions JSON-lines")->required();
  evl->add_option("--out", report_out, "Metric report JSON")->required();
  evl->add_option("--geojson", geojson_dir, "Directory for a GeoJSON export");
  evl->add_option("--csv", csv_out, "Per-vessel metrics CSV");
  evl->add_option("--horizons", horizons_text, "Comma-separated horizons (default: full length)");
  evl->add_flag("--joint-best", joint_best, "Select one sample by ADE and report its FDE");

  // ablate
  auto * abl = app.add_subcommand("ablate", "Component and interaction-boundary ablations");
  std::string ablate_scenes, toggle_text, tau_text, table_out;
  abl->add_option("--config", config_path, "Run config JSON");
  abl->add_option("--scenes", ablate_scenes, "Scenes JSON-lines (default: synthetic)");
  abl->add_option("--toggle", toggle_text, "Components in ladder order (default: unet,dgc,res)");
  abl->add_option("--tau-sweep", tau_text, "Comma-separated tau values, e.g. 1,5,50,none");
  abl->add_option("--out", table_out, "Comparison table CSV")->required();
  abl->add_option("--seed", seed, "Seed (overrides run.seed)");

  std::vector<const char *> argv{"vesselcast"};
  for (const auto & a : args) {
    argv.push_back(a.c_str());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError & e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (pre->parsed()) {
      const RunConfig cfg = config_for(config_path, std::nullopt, threads);
      const ParseReport parsed = parse_ais_csv(csv_path, cfg.columns);
      const TrackReport tracks = build_tracks(parsed.records, cfg.resample, cfg.v_max);
      SceneDataset ds = extract_scenes(tracks.trajectories, cfg.extract);
      const std::string data_hash =
        hash_hex(read_bytes(csv_path) + cfg.document["data"].dump());
      for (auto & s : ds.scenes) {
        s.data_hash = data_hash;
      }
      write_scenes_jsonl(scenes_out, ds.scenes);
      out << "rows: " << parsed.rows << "\n"
          << "malformed rows: " << parsed.malformed << "\n"
          << "vessels: " << tracks.vessels << "\n"
          << "skipped vessels: " << tracks.skipped_vessels << "\n"
          << "trajectories: " << tracks.trajectories.size() << "\n"
          << "interaction scenes: " << ds.scenes.size() << "\n"
          << "max vessels per scene: " << ds.max_vessels() << "\n"
          << "data hash: " << data_hash << "\n";
      for (const auto & w : ds.warnings) {
        err << "warning: " << w << '\n';
      }
      return kExitOk;
    }

    if (syn->parsed()) {
      const RunConfig cfg = config_for(config_path, seed, threads);
      SceneDataset ds = generate_synthetic_scenes(cfg.synthetic, cfg.seed);
      const std::string data_hash =
        hash_hex("synthetic" + cfg.document["synthetic"].dump() + cfg.document["data"].dump() +
                 std::to_string(cfg.seed));
      for (auto & s : ds.scenes) {
        s.data_hash = data_hash;
      }
      write_scenes_jsonl(synth_out, ds.scenes);
      out << "interaction scenes: " << ds.scenes.size() << "\n"
          << "max vessels per scene: " << ds.max_vessels() << "\n"
          << "data hash: " << data_hash << "\n";
      return kExitOk;
    }

    if (trn->parsed()) {
      const RunConfig cfg = config_for(config_path, seed, threads);
      const auto all = read_scenes_jsonl(train_scenes);
      const auto scenes = select_split(all, train_split);
      if (scenes.empty()) {
        throw InputError("no scenes in split '" + train_split + "' of " + train_scenes);
      }
      const std::string data_hash = scenes_data_hash(scenes);
      const fs::path log_path = log_out.empty() ? fs::path(ckpt_out + ".log.jsonl") : fs::path(log_out);
      std::ofstream log(log_path, std::ios::binary);
      if (!log) {
        throw InputError("cannot write " + log_path.string());
      }
      TrainResult result;
      auto finish = [&](Checkpoint & c) {
        c.config_hash = cfg.hash;
        c.data_hash = data_hash;
        c.run_config = cfg.document;
      };
      try {
        result = train(scenes, cfg.train_setup(), [&](const EpochLog & e) {
          nlohmann::json rec = epoch_log_to_json(e);
          rec["config_hash"] = cfg.hash;
          log << rec.dump() << '\n' << std::flush;
        });
      } catch (const TrainingDiverged & e) {
        Checkpoint last = e.last_good();
        finish(last);
        const std::string path = ckpt_out + ".last-good";
        save_checkpoint(last, path);
        err << "error: " << e.what() << "; last good checkpoint written to " << path << '\n';
        return kExitNumerical;
      }
      finish(result.checkpoint);
      save_checkpoint(result.checkpoint, ckpt_out);
      out << "scenes: " << scenes.size() << "\n"
          << "steps: " << result.checkpoint.step << "\n"
          << "first epoch loss: " << result.log.front().mean_loss << "\n"
          << "final epoch loss: " << result.log.back().mean_loss << "\n"
          << "config hash: " << cfg.hash << "\n";
      return kExitOk;
    }

    if (prd->parsed()) {
      const Checkpoint ckpt = load_checkpoint(ckpt_in);
      const auto scenes = select_split(read_scenes_jsonl(predict_scenes_path), predict_split);
      if (scenes.empty()) {
        throw InputError("no scenes in split '" + predict_split + "' of " + predict_scenes_path);
      }
      for (const auto & s : scenes) {
        check_compatible(ckpt, s);
        if (!ckpt.data_hash.empty() && !s.data_hash.empty() && s.data_hash != ckpt.data_hash) {
          throw InputError(
            "scene " + s.id + " has data hash " + s.data_hash + " but the checkpoint was trained on " +
            ckpt.data_hash);
        }
      }
      std::size_t n = 20;
      if (ckpt.run_config.contains("evaluation")) {
        n = ckpt.run_config["evaluation"].value("n_samples", n);
      }
      if (n_samples) {
        n = *n_samples;
      }
      if (n < 1) {
        throw InputError("--n must be at least 1");
      }
      const int t = threads.value_or(ckpt.training.threads);
      const auto preds = predict_scenes(ckpt, scenes, n, seed.value_or(ckpt.training.seed), t);
      write_predictions_jsonl(preds_out, preds);
      out << "scenes: " << preds.size() << "\n"
          << "samples per scene: " << n << "\n"
          << "config hash: " << ckpt.config_hash << "\n";
      return kExitOk;
    }

    if (evl->parsed()) {
      const auto preds = read_predictions_jsonl(preds_in);
      EvaluationOptions options;
      options.joint_best = joint_best;
      for (const auto & h : split_list(horizons_text)) {
        std::size_t used = 0;
        std::size_t value = 0;
        try {
          value = std::stoul(h, &used);
        } catch (const std::exception &) {
          used = 0;
        }
        if (used != h.size() || value == 0) {
          throw InputError("invalid horizon '" + h + "'");
        }
        options.horizons.push_back(value);
      }
      const MetricReport report = best_of_n_evaluate(preds, options);
      export_results(preds, report, ExportFormat::kJson, report_out);
      if (!csv_out.empty()) {
        export_results(preds, report, ExportFormat::kCsv, csv_out);
      }
      if (!geojson_dir.empty()) {
        fs::create_directories(geojson_dir);
        export_results(preds, report, ExportFormat::kGeoJson, fs::path(geojson_dir) / "predictions.geojson");
      }
      for (const auto & [h, m] : report.horizons) {
        out << "horizon " << h << ": ADE " << m.ade << " hm, FDE " << m.fde << " hm\n";
      }
      out << "scenes: " << report.scene_count << ", N: " << report.n_samples
          << ", config hash: " << report.config_hash << "\n";
      return kExitOk;
    }

    if (abl->parsed()) {
      const RunConfig cfg = config_for(config_path, seed, threads);
      std::vector<Scene> scenes;
      if (ablate_scenes.empty()) {
        scenes = generate_synthetic_scenes(cfg.synthetic, cfg.seed).scenes;
      } else {
        scenes = read_scenes_jsonl(ablate_scenes);
      }
      if (scenes.empty()) {
        throw InputError("no scenes to ablate on");
      }
      std::vector<AblationVariant> variants;
      if (!toggle_text.empty() || tau_text.empty()) {
        const auto toggles = split_list(toggle_text.empty() ? "unet,dgc,res" : toggle_text);
        variants = toggle_ladder(toggles, cfg.tau);
      }
      if (!tau_text.empty()) {
        const auto sweep = tau_sweep(parse_tau_list(tau_text));
        variants.insert(variants.end(), sweep.begin(), sweep.end());
      }
      const auto rows =
        run_ablation(cfg, split_or_all(scenes, "train"), split_or_all(scenes, "test"), variants);
      write_text(table_out, ablation_csv(rows));
      out << ablation_csv(rows);
      return kExitOk;
    }
  } catch (const NumericalError & e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception & e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace vesselcast
