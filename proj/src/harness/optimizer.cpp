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

#include "hdf/harness/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <algorithm>

namespace hdf::harness {

void OptimConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("optim: " + what); };
  if (!(lr > 0) || !(min_lr > 0)) fail("learning rates must be > 0");
  if (min_lr > lr) fail("min_lr must not exceed lr");
  if (!(weight_decay >= 0)) fail("weight_decay must be >= 0");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) fail("betas must be in [0, 1)");
  if (!(eps > 0)) fail("eps must be > 0");
  if (epochs < 1) fail("epochs must be >= 1");
  if (warmup_epochs > epochs) fail("warmup_epochs must not exceed epochs");
}

CosineSchedule::CosineSchedule(const OptimConfig& cfg, std::size_t steps_per_epoch)
    : lr_(cfg.lr), min_lr_(cfg.min_lr), warmup_(cfg.warmup_epochs * steps_per_epoch), total_(cfg.epochs * steps_per_epoch) {}

double CosineSchedule::at(std::size_t step) const {
  if (step < warmup_) return lr_ * static_cast<double>(step + 1) / static_cast<double>(warmup_);
  if (total_ <= warmup_ + 1) return lr_;
  const double p = std::min(1.0, static_cast<double>(step - warmup_) / static_cast<double>(total_ - warmup_ - 1));
  return min_lr_ + 0.5 * (lr_ - min_lr_) * (1.0 + std::cos(std::numbers::pi * p));
}

void AdamW::step(ad::ParameterSet<float>& params, double lr) {
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i].value.size(), 0.0);
      v_[i].assign(params[i].value.size(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw std::logic_error("AdamW: parameter set changed between steps");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    const bool decay = p.value.rank() >= 2 && !p.name.ends_with("bias") && !p.name.ends_with("gain");
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const double g = p.grad[j];
      m[j] = cfg_.beta1 * m[j] + (1 - cfg_.beta1) * g;
      v[j] = cfg_.beta2 * v[j] + (1 - cfg_.beta2) * g * g;
      double w = p.value[j];
      if (decay) w -= lr * cfg_.weight_decay * w;
      w -= lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + cfg_.eps);
      p.value[j] = static_cast<float>(w);
    }
  }
}

}  // namespace hdf::harness
