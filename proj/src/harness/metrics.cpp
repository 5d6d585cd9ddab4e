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

#include "hdf/harness/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hdf::harness {

MetricsReport metrics_from_confusion(const std::vector<std::vector<std::int64_t>>& confusion) {
  const std::size_t k = confusion.size();
  if (k == 0) throw std::invalid_argument("metrics: empty confusion matrix");
  MetricsReport m;
  m.confusion = confusion;
  m.per_class_recall.assign(k, std::numeric_limits<double>::quiet_NaN());
  std::int64_t correct = 0;
  double recall_sum = 0;
  std::size_t present = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (confusion[i].size() != k) throw std::invalid_argument("metrics: confusion matrix is not square");
    std::int64_t row = 0;
    for (std::int64_t v : confusion[i]) {
      if (v < 0) throw std::invalid_argument("metrics: negative count");
      row += v;
    }
    m.total += row;
    correct += confusion[i][i];
    if (row == 0) {
      m.absent_classes.push_back(static_cast<int>(i));
      continue;
    }
    m.per_class_recall[i] = 100.0 * static_cast<double>(confusion[i][i]) / static_cast<double>(row);
    recall_sum += m.per_class_recall[i];
    ++present;
  }
  if (m.total == 0) throw std::invalid_argument("metrics: no samples");
  m.war = 100.0 * static_cast<double>(correct) / static_cast<double>(m.total);
  m.uar = recall_sum / static_cast<double>(present);
  return m;
}

MetricsReport compute_metrics(const std::vector<int>& predictions, const std::vector<int>& labels,
                              std::size_t num_classes) {
  if (predictions.empty()) throw std::invalid_argument("metrics: empty input");
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("metrics: " + std::to_string(predictions.size()) + " predictions for " +
                                std::to_string(labels.size()) + " labels");
  }
  std::vector<std::vector<std::int64_t>> conf(num_classes, std::vector<std::int64_t>(num_classes, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i], p = predictions[i];
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes || p < 0 || static_cast<std::size_t>(p) >= num_classes) {
      throw std::out_of_range("metrics: class index outside [0, " + std::to_string(num_classes) + ") at row " +
                              std::to_string(i));
    }
    ++conf[static_cast<std::size_t>(y)][static_cast<std::size_t>(p)];
  }
  return metrics_from_confusion(conf);
}

nlohmann::json to_json(const MetricsReport& m) {
  nlohmann::json recall = nlohmann::json::array();
  for (double r : m.per_class_recall) recall.push_back(std::isnan(r) ? nlohmann::json(nullptr) : nlohmann::json(r));
  return {{"war", m.war},           {"uar", m.uar},        {"per_class_recall", recall},
          {"confusion", m.confusion}, {"absent_classes", m.absent_classes}, {"total", m.total}};
}

}  // namespace hdf::harness
