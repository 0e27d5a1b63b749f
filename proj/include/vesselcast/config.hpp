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
#ifndef VESSELCAST__CONFIG_HPP_
#define VESSELCAST__CONFIG_HPP_

#include "vesselcast/ais.hpp"
#include "vesselcast/denoiser.hpp"
#include "vesselcast/evaluation.hpp"
#include "vesselcast/scene.hpp"
#include "vesselcast/synthetic.hpp"
#include "vesselcast/training.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace vesselcast
{

class ConfigError : public InputError
{
public:
  using InputError::InputError;
};

/// Every tunable of a run, resolved from defaults, an optional profile, a
/// JSON document and environment overrides, in that order.
struct RunConfig
{
  std::string profile = "full";
  std::uint64_t seed = 0;
  int threads = 1;

  ColumnMap columns;
  ResampleOptions resample;
  double v_max = 0.3;  // hm / s
  ExtractOptions extract;

  InteractionBoundary tau = kDefaultTau;

  int steps = 100;
  double beta_first = 1e-4;
  double beta_last = 0.05;
  ReverseDenominator denominator = ReverseDenominator::kCumulative;
  std::optional<double> position_scale;

  DenoiserConfig denoiser;
  TrainConfig training;

  std::size_t n_samples = 20;
  EvaluationOptions evaluation;

  SyntheticConfig synthetic;

  /// The resolved document; feeds the hash.
  nlohmann::json document;
  std::string hash;

  TrainSetup train_setup() const;
};

/// Defaults for a profile ("full" or "desk").
nlohmann::json default_config_json(const std::string & profile = "full");

using Environment = std::map<std::string, std::string>;

/// Snapshot of the VESSELCAST_* variables of the process environment.
Environment environment_overrides();

/// Resolves \p document over the defaults. Unknown sections or keys and
/// values of the wrong type raise ConfigError.
RunConfig resolve_config(const nlohmann::json & document, const Environment & env = {});
RunConfig load_config(const std::filesystem::path & path, const Environment & env = {});

/// 64-bit FNV-1a digest as 16 lowercase hex digits.
std::string hash_hex(const std::string & bytes);
std::string config_hash(const nlohmann::json & resolved);

}  // namespace vesselcast

#endif  // VESSELCAST__CONFIG_HPP_
