// Copyright 2026 The HDF Authors.
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdf/dsm.hpp"
#include "hdf/harness/optimizer.hpp"
#include "hdf/harness/synthetic.hpp"
#include "hdf/model.hpp"

// Run configuration. The text form is one `dotted.key = value` per line;
// `#` starts a comment. Every key has a default (see `hdf config` or
// dump_config) and unknown keys are errors.

namespace hdf::harness {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TrainConfig {
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  /// Ablation setting trained by `hdf train`: a | b | c | d | freq | time.
  std::string setting = "d";
  bool operator==(const TrainConfig&) const = default;
};

struct LandscapeConfig {
  double extent = 1.0;
  std::size_t resolution = 11;
  std::size_t batch = 32;
  std::uint64_t seed = 7;
  /// ce | total
  std::string loss = "ce";
  bool operator==(const LandscapeConfig&) const = default;
};

struct AblateConfig {
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::vector<std::string> settings{"a", "b", "c", "d", "freq", "time"};
  bool operator==(const AblateConfig&) const = default;
};

struct RunConfig {
  SyntheticSpec data;
  model::ModelConfig model;
  dsm::DsmConfig dsm;
  OptimConfig optim;
  TrainConfig train;
  LandscapeConfig landscape;
  AblateConfig ablate;

  /// Runs every section's validation; throws ConfigError.
  void validate() const;
  /// Model config with the input extents and classes taken from the data spec.
  model::ModelConfig model_for_data() const;
};

struct ConfigKey {
  std::string key;
  std::string default_value;
  std::string doc;
};

const std::vector<ConfigKey>& config_keys();

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& cfg, const std::string& key);

/// Applies `text` on top of `base`. Duplicate keys within one text are errors.
RunConfig parse_config(const std::string& text, RunConfig base = {}, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
/// Applies one `key=value` override.
void apply_override(RunConfig& cfg, const std::string& assignment);

/// Every key with its current value, commented with its documentation.
std::string dump_config(const RunConfig& cfg);

}  // namespace hdf::harness
