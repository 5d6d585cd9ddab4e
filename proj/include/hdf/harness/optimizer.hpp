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

#include <vector>

#include "hdf/diffcore/tensor.hpp"

namespace hdf::harness {

struct OptimConfig {
  double lr = 5e-4;
  double min_lr = 5e-6;
  double weight_decay = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t warmup_epochs = 6;
  std::size_t epochs = 30;

  void validate() const;
  bool operator==(const OptimConfig&) const = default;
};

/// Linear warm-up to lr, then cosine decay to min_lr, evaluated per step.
class CosineSchedule {
 public:
  CosineSchedule(const OptimConfig& cfg, std::size_t steps_per_epoch);
  double at(std::size_t step) const;
  std::size_t total_steps() const { return total_; }

 private:
  double lr_, min_lr_;
  std::size_t warmup_, total_;
};

/// AdamW with decoupled weight decay. Decay skips biases and rank <= 1
/// tensors such as the attention-module scalars.
class AdamW {
 public:
  explicit AdamW(const OptimConfig& cfg) : cfg_(cfg) {}
  void step(ad::ParameterSet<float>& params, double lr);
  std::size_t steps() const { return t_; }

 private:
  OptimConfig cfg_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace hdf::harness
