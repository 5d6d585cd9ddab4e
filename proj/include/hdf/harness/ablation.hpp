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

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hdf/harness/dataset_io.hpp"
#include "hdf/harness/train.hpp"

namespace hdf::harness {

struct AblationRun {
  std::string setting;
  std::uint64_t seed = 0;
  std::size_t parameters = 0;
  MetricsReport test;
};

struct SettingSummary {
  std::string setting;
  std::size_t runs = 0;
  double war_mean = 0, war_std = 0;
  double uar_mean = 0, uar_std = 0;
};

struct AblationReport {
  std::vector<AblationRun> runs;
  std::vector<SettingSummary> summary() const;
  std::optional<SettingSummary> find(const std::string& setting) const;
};

/// Trains every (setting, seed) pair of cfg.ablate on the same data and
/// evaluates on the test split. Epoch records go to `records`.
AblationReport run_ablation(const RunConfig& cfg, const DatasetBundle& data, std::ostream* records = nullptr,
                            std::ostream* progress = nullptr);

/// Component ablation: settings a-d against attention module / DSM.
std::string format_component_table(const AblationReport& r);
/// Branch ablation, all rows with DSM: none (= c), freq, time, both (= d).
std::string format_branch_table(const AblationReport& r);

}  // namespace hdf::harness
