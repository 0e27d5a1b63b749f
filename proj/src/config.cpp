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
#include "vesselcast/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

extern char ** environ;

namespace vesselcast
{

namespace
{

constexpr const char * kEnvPrefix = "VESSELCAST_";

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

nlohmann::json parse_env_value(const std::string & raw, const nlohmann::json & like)
{
  auto scalar = [](const std::string & text) {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &) {
      return nlohmann::json(text);
    }
  };
  if (like.is_array()) {
    nlohmann::json parsed = scalar(raw);
    if (parsed.is_array()) {
      return parsed;
    }
    nlohmann::json out = nlohmann::json::array();
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) {
        out.push_back(scalar(item));
      }
    }
    return out;
  }
  if (like.is_string()) {
    return nlohmann::json(raw);
  }
  return scalar(raw);
}

void merge_section(
  nlohmann::json & base, const nlohmann::json & patch, const std::string & where)
{
  if (!patch.is_object()) {
    throw ConfigError("config: " + where + " must be an object");
  }
  for (const auto & [key, value] : patch.items()) {
    if (!base.contains(key)) {
      throw ConfigError("config: unknown key '" + (where.empty() ? key : where + "." + key) + "'");
    }
    nlohmann::json & slot = base[key];
    if (slot.is_object()) {
      merge_section(slot, value, where.empty() ? key : where + "." + key);
    } else {
      slot = value;
    }
  }
}

template<typename T>
T field(const nlohmann::json & section, const std::string & name, const std::string & key)
{
  try {
    return section.at(key).get<T>();
  } catch (const nlohmann::json::exception &) {
    throw ConfigError(
      "config: " + name + "." + key + " has the wrong type (" + section.at(key).dump() + ")");
  }
}

std::size_t count_field(const nlohmann::json & section, const std::string & name, const std::string & key)
{
  const auto & v = section.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError("config: " + name + "." + key + " must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::optional<double> optional_number(
  const nlohmann::json & section, const std::string & name, const std::string & key,
  const char * keyword)
{
  const auto & v = section.at(key);
  if (v.is_null() || (v.is_string() && lower(v.get<std::string>()) == keyword)) {
    return std::nullopt;
  }
  if (!v.is_number()) {
    throw ConfigError(
      "config: " + name + "." + key + " must be a number or \"" + keyword + "\"");
  }
  return v.get<double>();
}

}  // namespace

nlohmann::json default_config_json(const std::string & profile)
{
  if (profile != "full" && profile != "desk") {
    throw ConfigError("config: unknown profile '" + profile + "' (full, desk)");
  }
  const bool desk = profile == "desk";
  const SyntheticConfig syn;
  return {
    {"run", {{"profile", profile}, {"seed", 0}, {"threads", 1}}},
    {"data",
     {{"mmsi_column", "mmsi"},
      {"timestamp_column", "timestamp"},
      {"lat_column", "lat"},
      {"lon_column", "lon"},
      {"dt", 10.0},
      {"gap_max", 120.0},
      {"v_max", 0.3},
      {"t_obs", 10},
      {"t_pred", 15},
      {"stride", 0},
      {"train_fraction", 0.8},
      {"val_fraction", 0.1}}},
    {"graph", {{"tau", kDefaultTau}}},
    {"diffusion",
     {{"steps", 100},
      {"beta_1", 1e-4},
      {"beta_K", 0.05},
      {"per_step_denominator", false},
      {"position_scale", "auto"}}},
    {"denoiser",
     {{"channels", desk ? 8 : 32},
      {"levels", desk ? 2 : 4},
      {"blocks_per_level", 2},
      {"disable_unet", false},
      {"disable_dgc", false},
      {"disable_residual", false}}},
    {"training",
     {{"batch_size", desk ? 16 : 256},
      {"epochs", desk ? 200 : 100},
      {"lr_init", 0.05},
      {"lr_peak", 0.2},
      {"lr_final", nullptr},
      {"warmup_fraction", 0.3}}},
    {"evaluation",
     {{"n_samples", 20}, {"joint_best", false}, {"horizons", nlohmann::json::array()}}},
    {"synthetic",
     {{"families", syn.families},
      {"scenes_per_family", syn.scenes_per_family},
      {"vessels", syn.vessels},
      {"noise", desk ? 0.05 : syn.noise},
      {"speed", syn.speed},
      {"turn_rate", syn.turn_rate},
      {"origin_lat", syn.origin.lat},
      {"origin_lon", syn.origin.lon},
      {"train_fraction", syn.train_fraction},
      {"val_fraction", syn.val_fraction}}}};
}

Environment environment_overrides()
{
  Environment env;
  for (char ** e = environ; e != nullptr && *e != nullptr; ++e) {
    const std::string entry(*e);
    if (entry.rfind(kEnvPrefix, 0) != 0) {
      continue;
    }
    const auto eq = entry.find('=');
    if (eq != std::string::npos) {
      env[entry.substr(0, eq)] = entry.substr(eq + 1);
    }
  }
  return env;
}

RunConfig resolve_config(const nlohmann::json & input, const Environment & env)
{
  const nlohmann::json document = input.is_null() ? nlohmann::json::object() : input;
  if (!document.is_object()) {
    throw ConfigError("config: top level must be a JSON object");
  }
  // Env overrides become a patch with the same shape as the document.
  const nlohmann::json shape = default_config_json();
  nlohmann::json env_patch = nlohmann::json::object();
  for (const auto & [name, raw] : env) {
    if (name.rfind(kEnvPrefix, 0) != 0) {
      continue;
    }
    const std::string rest = name.substr(std::char_traits<char>::length(kEnvPrefix));
    const auto sep = rest.find('_');
    const std::string section = lower(rest.substr(0, sep));
    if (sep == std::string::npos || !shape.contains(section)) {
      throw ConfigError("config: unknown environment override " + name);
    }
    const std::string wanted = lower(rest.substr(sep + 1));
    std::string key;
    for (const auto & [k, v] : shape.at(section).items()) {
      if (lower(k) == wanted) {
        key = k;
      }
    }
    if (key.empty()) {
      throw ConfigError("config: unknown environment override " + name);
    }
    env_patch[section][key] = parse_env_value(raw, shape.at(section).at(key));
  }

  std::string profile = "full";
  if (document.contains("run") && document["run"].contains("profile")) {
    if (!document["run"]["profile"].is_string()) {
      throw ConfigError("config: run.profile must be a string");
    }
    profile = document["run"]["profile"].get<std::string>();
  }
  if (env_patch.contains("run") && env_patch["run"].contains("profile")) {
    profile = env_patch["run"]["profile"].get<std::string>();
  }
  nlohmann::json resolved = default_config_json(profile);
  merge_section(resolved, document, "");
  merge_section(resolved, env_patch, "");

  RunConfig c;
  c.document = resolved;
  c.hash = config_hash(resolved);

  const auto & run = resolved["run"];
  c.profile = profile;
  c.seed = field<std::uint64_t>(run, "run", "seed");
  c.threads = field<int>(run, "run", "threads");

  const auto & data = resolved["data"];
  c.columns.mmsi = field<std::string>(data, "data", "mmsi_column");
  c.columns.timestamp = field<std::string>(data, "data", "timestamp_column");
  c.columns.lat = field<std::string>(data, "data", "lat_column");
  c.columns.lon = field<std::string>(data, "data", "lon_column");
  c.resample.dt = field<double>(data, "data", "dt");
  c.resample.gap_max = field<double>(data, "data", "gap_max");
  c.v_max = field<double>(data, "data", "v_max");
  c.extract.t_obs = count_field(data, "data", "t_obs");
  c.extract.t_pred = count_field(data, "data", "t_pred");
  c.extract.stride = count_field(data, "data", "stride");
  c.extract.dt = c.resample.dt;
  c.extract.train_fraction = field<double>(data, "data", "train_fraction");
  c.extract.val_fraction = field<double>(data, "data", "val_fraction");
  if (!(c.resample.dt > 0.0) || !(c.resample.gap_max >= c.resample.dt) || !(c.v_max > 0.0)) {
    throw ConfigError("config: require dt > 0, gap_max >= dt and v_max > 0");
  }
  if (c.extract.t_obs < 2 || c.extract.t_pred < 1) {
    throw ConfigError("config: require t_obs >= 2 and t_pred >= 1");
  }
  const double tf = c.extract.train_fraction;
  const double vf = c.extract.val_fraction;
  if (!(tf >= 0.0) || !(vf >= 0.0) || tf + vf > 1.0) {
    throw ConfigError("config: split fractions must be non-negative and sum to at most 1");
  }

  c.tau = optional_number(resolved["graph"], "graph", "tau", "none");
  if (c.tau && !(*c.tau > 0.0)) {
    throw ConfigError("config: graph.tau must be positive or \"none\"");
  }

  const auto & diff = resolved["diffusion"];
  c.steps = field<int>(diff, "diffusion", "steps");
  c.beta_first = field<double>(diff, "diffusion", "beta_1");
  c.beta_last = field<double>(diff, "diffusion", "beta_K");
  c.denominator = field<bool>(diff, "diffusion", "per_step_denominator")
                    ? ReverseDenominator::kPerStep
                    : ReverseDenominator::kCumulative;
  c.position_scale = optional_number(diff, "diffusion", "position_scale", "auto");
  if (c.position_scale && !(*c.position_scale > 0.0)) {
    throw ConfigError("config: diffusion.position_scale must be positive or \"auto\"");
  }
  try {
    (void)make_noise_schedule(c.steps, c.beta_first, c.beta_last);
  } catch (const std::invalid_argument & e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  const auto & den = resolved["denoiser"];
  c.denoiser.channels = count_field(den, "denoiser", "channels");
  c.denoiser.levels = count_field(den, "denoiser", "levels");
  c.denoiser.blocks_per_level = count_field(den, "denoiser", "blocks_per_level");
  c.denoiser.disable_unet = field<bool>(den, "denoiser", "disable_unet");
  c.denoiser.disable_dgc = field<bool>(den, "denoiser", "disable_dgc");
  c.denoiser.disable_residual = field<bool>(den, "denoiser", "disable_residual");
  c.denoiser.features = kFeatures;
  c.denoiser.t_obs = c.extract.t_obs;
  c.denoiser.t_pred = c.extract.t_pred;

  const auto & tr = resolved["training"];
  c.training.batch_size = count_field(tr, "training", "batch_size");
  c.training.epochs = count_field(tr, "training", "epochs");
  c.training.lr_init = field<double>(tr, "training", "lr_init");
  c.training.lr_peak = field<double>(tr, "training", "lr_peak");
  if (!tr.at("lr_final").is_null()) {
    c.training.lr_final = field<double>(tr, "training", "lr_final");
  }
  c.training.warmup_fraction = field<double>(tr, "training", "warmup_fraction");
  c.training.seed = c.seed;
  c.training.threads = c.threads;

  const auto & ev = resolved["evaluation"];
  c.n_samples = count_field(ev, "evaluation", "n_samples");
  c.evaluation.joint_best = field<bool>(ev, "evaluation", "joint_best");
  c.evaluation.horizons = field<std::vector<std::size_t>>(ev, "evaluation", "horizons");
  if (c.n_samples < 1) {
    throw ConfigError("config: evaluation.n_samples must be >= 1");
  }

  const auto & syn = resolved["synthetic"];
  c.synthetic.families = field<std::vector<std::string>>(syn, "synthetic", "families");
  c.synthetic.scenes_per_family = count_field(syn, "synthetic", "scenes_per_family");
  c.synthetic.vessels = count_field(syn, "synthetic", "vessels");
  c.synthetic.noise = field<double>(syn, "synthetic", "noise");
  c.synthetic.speed = field<double>(syn, "synthetic", "speed");
  c.synthetic.turn_rate = field<double>(syn, "synthetic", "turn_rate");
  c.synthetic.origin = {
    field<double>(syn, "synthetic", "origin_lat"), field<double>(syn, "synthetic", "origin_lon")};
  c.synthetic.train_fraction = field<double>(syn, "synthetic", "train_fraction");
  c.synthetic.val_fraction = field<double>(syn, "synthetic", "val_fraction");
  c.synthetic.t_obs = c.extract.t_obs;
  c.synthetic.t_pred = c.extract.t_pred;
  for (const auto & f : c.synthetic.families) {
    if (!is_known_family(f)) {
      throw ConfigError("config: unknown synthetic family '" + f + "'");
    }
  }

  try {
    c.denoiser.validate();
    c.training.validate();
  } catch (const std::invalid_argument & e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path & path, const Environment & env)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path.string());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error & e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return resolve_config(doc, env);
}

TrainSetup RunConfig::train_setup() const
{
  TrainSetup s;
  s.denoiser = denoiser;
  s.training = training;
  s.steps = steps;
  s.beta_first = beta_first;
  s.beta_last = beta_last;
  s.tau = tau;
  s.denominator = denominator;
  s.position_scale = position_scale;
  return s;
}

std::string hash_hex(const std::string & bytes)
{
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const nlohmann::json & resolved) { return hash_hex(resolved.dump()); }

}  // namespace vesselcast
