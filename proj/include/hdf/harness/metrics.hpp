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
#include <vector>

#include <json.hpp>

namespace hdf::harness {

/// Recall figures are percentages.
struct MetricsReport {
  double war = 0;
  double uar = 0;
  std::vector<double> per_class_recall;       // NaN for classes with no samples
  std::vector<std::vector<std::int64_t>> confusion;  // [true][pred]
  std::vector<int> absent_classes;            // excluded from UAR
  std::int64_t total = 0;
};

/// Reads recall off a square confusion matrix. Throws when it is empty or
/// holds no samples.
MetricsReport metrics_from_confusion(const std::vector<std::vector<std::int64_t>>& confusion);

/// Throws on empty input, length mismatch or labels outside [0, K).
MetricsReport compute_metrics(const std::vector<int>& predictions, const std::vector<int>& labels,
                              std::size_t num_classes);

nlohmann::json to_json(const MetricsReport& m);

}  // namespace hdf::harness
