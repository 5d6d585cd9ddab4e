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
#include <optional>
#include <stdexcept>
#include <string>

#include "hdf/dam/frequency.hpp"
#include "hdf/dam/fusion.hpp"
#include "hdf/dam/temporal.hpp"

namespace hdf::model {

using ad::Graph;
using ad::ParameterSet;
using ad::Shape;
using ad::Tensor;
using ad::Var;

enum class Backbone { kTiny3dConv, kIdentity };

std::string to_string(Backbone b);
Backbone parse_backbone(const std::string& s);
std::string to_string(dam::FusionNorm n);
dam::FusionNorm parse_fusion_norm(const std::string& s);
std::string to_string(dam::VarianceAxes a);
dam::VarianceAxes parse_variance_axes(const std::string& s);

struct ModelConfig {
  Backbone backbone = Backbone::kTiny3dConv;
  // input clip
  std::size_t frames = 8;
  std::size_t in_channels = 1;
  std::size_t height = 32;
  std::size_t width = 32;
  // backbone: stage k has channels * 2^k outputs, 3x3x3 kernels, spatial stride 2
  std::size_t channels = 8;
  std::size_t stages = 2;
  std::size_t temporal_stride = 1;
  /// Each stage normalizes its conv output over the whole clip (one group)
  /// before a per-channel gain and bias.
  bool backbone_norm = true;
  // heads
  std::size_t num_classes = 4;
  std::size_t embed_dim = 16;
  /// Projection head for the contrastive loss. Without it the embeddings
  /// are the normalized pooled features.
  bool embed_head = true;
  // attention module
  bool dam_enabled = true;
  bool freq_enabled = true;
  bool temporal_enabled = true;
  dam::FusionNorm fusion_norm = dam::FusionNorm::kRenormalize;
  dam::VarianceAxes variance_axes = dam::VarianceAxes::kPerFrame;
  double epsilon_adv = 0.03;

  /// Throws std::invalid_argument.
  void validate() const;
  /// [T', C', H', W'] of the backbone output.
  Shape feature_shape() const;
  bool use_freq() const { return dam_enabled && freq_enabled; }
  bool use_temporal() const { return dam_enabled && temporal_enabled; }

  bool operator==(const ModelConfig&) const = default;
};

/// Raised when an activation stops being finite.
class NonFiniteError : public std::runtime_error {
 public:
  explicit NonFiniteError(const std::string& stage)
      : std::runtime_error("non-finite values after " + stage), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

template <typename T>
struct ModelOutput {
  Var<T> features;    // backbone output [B, T', C', H', W']
  Var<T> attended;    // after the attention module (== features when bypassed)
  Var<T> pooled;      // [B, C']
  Var<T> logits;      // [B, K]
  Var<T> embeddings;  // [B, d], unit rows
  std::optional<dam::FreqState<T>> freq;
  std::optional<dam::TemporalState<T>> temporal;
  std::optional<dam::FusionState<T>> fusion;
};

template <typename T>
class Model {
 public:
  Model(ModelConfig cfg, std::uint64_t seed);
  /// Adopts existing parameters; names and shapes must match the config.
  Model(ModelConfig cfg, ParameterSet<T> params);

  const ModelConfig& config() const { return cfg_; }
  ParameterSet<T>& params() { return params_; }
  const ParameterSet<T>& params() const { return params_; }

  ModelOutput<T> forward(Graph<T>& g, const Var<T>& x);
  ModelOutput<T> forward(Graph<T>& g, const Tensor<T>& x) { return forward(g, g.input(x, false)); }

  /// Pooled features -> logits and embeddings.
  void heads(Graph<T>& g, ModelOutput<T>& out);

  template <typename U>
  Model<U> cast() const {
    ParameterSet<U> p;
    for (std::size_t i = 0; i < params_.size(); ++i) p.add(params_[i].name, params_[i].value.template cast<U>());
    return Model<U>(cfg_, std::move(p));
  }

 private:
  ModelConfig cfg_;
  ParameterSet<T> params_;
  dct::DctPlan<T> plan_;
};

/// Registers every parameter for cfg. Each tensor draws from its own
/// named stream, so configs that share a parameter share its initial value.
template <typename T>
ParameterSet<T> init_params(const ModelConfig& cfg, std::uint64_t seed);

/// Ablation setting: model flags plus whether the contrastive loss is on.
struct Variant {
  std::string setting;
  ModelConfig model;
  bool use_dsm = false;
};

/// a: backbone + CE; b: + attention module; c: backbone + DSM; d: full.
/// freq / time: DSM with a single attention branch.
Variant ablation_variant(const std::string& setting, const ModelConfig& base);

}  // namespace hdf::model
