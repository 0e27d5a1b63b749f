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
#ifndef VESSELCAST__CLI_HPP_
#define VESSELCAST__CLI_HPP_

#include "vesselcast/config.hpp"
#include "vesselcast/evaluation.hpp"
#include "vesselcast/graph.hpp"
#include "vesselcast/scene.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace vesselcast
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

/// Runs the command line (args excludes the program name) and returns the
/// process exit code.
int run_cli(const std::vector<std::string> & args, std::ostream & out, std::ostream & err);

struct AblationVariant
{
  std::string kind;  // "toggle" or "tau"
  std::string name;
  bool unet = true;
  bool dgc = true;
  bool residual = true;
  InteractionBoundary tau = kDefaultTau;
};

/// Cumulative ladder: the first row disables every listed component, each
/// further row re-enables the next one. Unlisted components stay enabled.
std::vector<AblationVariant> toggle_ladder(
  const std::vector<std::string> & toggles, InteractionBoundary tau);
std::vector<AblationVariant> tau_sweep(const std::vector<InteractionBoundary> & taus);
std::vector<InteractionBoundary> parse_tau_list(const std::string & text);

struct AblationRow
{
  AblationVariant variant;
  double ade = 0.0;
  double fde = 0.0;
  std::string config_hash;
};

/// Trains and scores one model per variant from the same seed and data.
std::vector<AblationRow> run_ablation(
  const RunConfig & base, const std::vector<Scene> & train_scenes,
  const std::vector<Scene> & eval_scenes, const std::vector<AblationVariant> & variants);
std::string ablation_csv(const std::vector<AblationRow> & rows);

/// Samples cfg.n_samples futures per scene, seeding scene i with
/// derive_seed(seed, 2, i).
std::vector<Prediction> predict_scenes(
  const Checkpoint & ckpt, const std::vector<Scene> & scenes, std::size_t n_samples,
  std::uint64_t seed, int threads);

std::string scenes_data_hash(const std::vector<Scene> & scenes);

}  // namespace vesselcast

#endif  // VESSELCAST__CLI_HPP_
