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

#include <ostream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "hdf/harness/config.hpp"
#include "hdf/harness/metrics.hpp"

namespace hdf::harness {

struct StepRecord {
  std::size_t epoch = 0, step = 0;
  double lr = 0;
  double loss = 0, ce = 0, sc = 0;
  double grad_norm = 0;  // of this step's loss; feeds the next step's weights
  dsm::ScalingState scaling;  // weights used by this step
  bool degenerate = false;
  double fusion_sum_error = 0;  // max |lambda_t + lambda_s - 1| in the batch
};

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0;
  double loss = 0, ce = 0, sc = 0;
  double grad_norm = 0;
  double lambda_ce = 0, lambda_sc = 0;
  MetricsReport test;
  bool has_test = false;
};

struct TrainResult {
  model::Variant variant;
  std::uint64_t seed = 0;
  ad::ParameterSet<float> params;
  std::vector<EpochRecord> epochs;
  std::vector<StepRecord> steps;
};

/// Thrown on a non-finite loss; carries the parameters before the bad step.
class TrainingAborted : public std::runtime_error {
 public:
  TrainingAborted(const std::string& what, ad::ParameterSet<float> last_good, std::size_t step)
      : std::runtime_error(what), last_good_(std::move(last_good)), step_(step) {}
  const ad::ParameterSet<float>& last_good() const { return last_good_; }
  std::size_t step() const { return step_; }

 private:
  ad::ParameterSet<float> last_good_;
  std::size_t step_;
};

struct TrainSinks {
  std::ostream* epochs = nullptr;  // one JSON record per epoch plus a summary
  std::ostream* steps = nullptr;   // one JSON record per optimization step
};

/// Model flags and loss wiring for cfg.train.setting ("custom" keeps the
/// model.* flags and enables the contrastive loss when embed_head is set).
model::Variant resolve_variant(const RunConfig& cfg, const std::string& setting);

/// Trains from a fresh initialization seeded with `seed`. `test` may be null.
TrainResult train(const RunConfig& cfg, const model::Variant& variant, std::uint64_t seed, const Dataset& train_set,
                  const Dataset* test, const TrainSinks& sinks = {});

/// Runs `steps` updates on one fixed batch with a constant learning rate.
/// Returns the loss at every step.
std::vector<StepRecord> overfit(const RunConfig& cfg, const model::Variant& variant, std::uint64_t seed,
                                const Dataset& data, const std::vector<std::size_t>& batch, std::size_t steps,
                                double lr);

/// Loss of one forward pass, weights as in training.
struct LossParts {
  ad::Var<float> total, ce, sc;
  bool degenerate = false;
  double fusion_sum_error = 0;
};
LossParts training_loss(model::Model<float>& m, ad::Graph<float>& g, const ad::Tensor<float>& x,
                        const std::vector<int>& labels, const model::Variant& variant, const dsm::DsmConfig& dsm,
                        const dsm::ScalingState& scaling);

MetricsReport evaluate(model::Model<float>& m, const Dataset& data, std::size_t batch = 50,
                       std::vector<int>* predictions = nullptr);

/// Normalized embeddings [N, d] in dataset order.
ad::Tensor<float> compute_embeddings(model::Model<float>& m, const Dataset& data, std::size_t batch = 50);

nlohmann::json to_json(const StepRecord& r);
nlohmann::json to_json(const EpochRecord& r);

}  // namespace hdf::harness
