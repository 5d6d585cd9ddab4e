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

#include "hdf/diffcore/ops.hpp"

// Distribution-aware scaling: reweighted supervised contrastive loss with a
// covariance-trace bottleneck term, and gradient-driven loss weights.

namespace hdf::dsm {

using ad::Tensor;
using ad::Var;

struct DsmConfig {
  double tau = 0.07;
  double eta = 0.2;
  double beta_ib = 0.01;
  double alpha_base = 1.0;
  double beta_base = 1.0;
  /// w == 1; the reweighted loss then reduces to plain SCL.
  bool uniform_weights = false;
  /// Let gradients flow through the Gaussian weights.
  bool differentiable_weights = false;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct ScalingState {
  double g = 1.0;
  double lambda_ce = 0.5;
  double lambda_sc = 0.5;
};

/// State for step 0 (g = 1).
ScalingState initial_scaling(const DsmConfig& cfg);

/// Recomputes both weights from the previous step's gradient norm.
/// Throws on a negative or non-finite norm.
ScalingState update_scaling(const ScalingState& state, double grad_norm_prev, const DsmConfig& cfg);

template <typename T>
struct ContrastiveResult {
  Var<T> loss;
  bool degenerate = false;  // no anchor had a positive
  std::size_t anchors = 0;
};

/// z z^T / tau, z: [N, d].
template <typename T>
Var<T> similarity(const Var<T>& z, double tau);

/// -(s - eta)^2 / (2 eta^2), elementwise.
template <typename T>
Var<T> gaussian_log_weights(const Var<T>& s, double eta);

template <typename T>
Var<T> gaussian_weights(const Var<T>& s, double eta);

/// Plain supervised contrastive loss, mean over anchors with positives.
template <typename T>
ContrastiveResult<T> scl_loss(const Var<T>& z, const std::vector<int>& labels, double tau);

/// Gaussian-reweighted variant. The log-domain weights keep the per-anchor
/// denominator finite when exp(-(s - eta)^2 / 2eta^2) underflows.
template <typename T>
ContrastiveResult<T> dsc_loss(const Var<T>& z, const std::vector<int>& labels, const DsmConfig& cfg);

/// dsc_loss with the log-weights supplied as constants [N, N]. With weights
/// taken from the same batch this equals dsc_loss in value and gradient when
/// differentiable_weights is off.
template <typename T>
ContrastiveResult<T> dsc_loss_fixed(const Var<T>& z, const std::vector<int>& labels, double tau,
                                    const Tensor<T>& log_weights);

/// Trace of the biased covariance of the rows of z.
template <typename T>
Var<T> ib_penalty(const Var<T>& z);

template <typename T>
ContrastiveResult<T> ib_dsc_loss(const Var<T>& z, const std::vector<int>& labels, const DsmConfig& cfg);

/// Mean softmax cross-entropy, logits [B, K].
template <typename T>
Var<T> cross_entropy(const Var<T>& logits, const std::vector<int>& labels);

template <typename T>
Var<T> total_loss(const Var<T>& ce, const Var<T>& ibdsc, const ScalingState& state);

}  // namespace hdf::dsm
