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

#include <string>

#include "hdf/dct.hpp"
#include "hdf/diffcore/init.hpp"
#include "hdf/diffcore/ops.hpp"

// Frequency attention branch. Operates on feature maps laid out as
// [B, T, C, H, W].

namespace hdf::dam {

using ad::Graph;
using ad::ParameterSet;
using ad::Tensor;
using ad::Var;

/// Axes over which the dynamic-fitting variance is taken.
enum class VarianceAxes {
  kPerFrame,   // per (b, t) over (C, H, W)
  kPerSample,  // per b over (T, C, H, W)
};

inline constexpr double kDynFitEpsilon = 1e-5;

struct FreqConfig {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  /// Fixed perturbation budget; never trained.
  double epsilon_adv = 0.03;
  VarianceAxes variance_axes = VarianceAxes::kPerFrame;
};

/// Learnable parameters bound into one graph.
template <typename T>
struct FreqParams {
  Var<T> alpha_adv, beta_adv;              // perturbation weights
  Var<T> alpha_dyn, gamma_dyn, beta_dyn;   // dynamic fitting
  Var<T> mix;                              // [C, C] channel mixing
  Var<T> wq, wk, wv;                       // [C, C] spatial attention
  T epsilon_adv = T(0.03);
};

template <typename T>
struct FreqState {
  Var<T> f_dct, f_adv, f_dyn, f_att, x_s;
};

/// Learnable 1x1 channel mixing after the framewise DCT.
template <typename T>
Var<T> extract_freq(const Var<T>& x, const Var<T>& mix, const dct::DctPlan<T>& plan);

/// Mini-batch mean over the batch axis, [1, T, C, H, W].
template <typename T>
Var<T> batch_mean(const Var<T>& f_dct);

/// Per-sample deviation ||f - mean||_2 over (T, C, H, W), shape [B, 1, 1, 1, 1].
template <typename T>
Var<T> sample_deviation(const Var<T>& f_dct, const Var<T>& mean);

/// f + alpha*eps*sign(f) + beta*sign(f)*||f - E[f]||_2. sign() carries no
/// gradient; the deviation does.
template <typename T>
Var<T> perturb(const Var<T>& f_dct, const Var<T>& alpha, const Var<T>& beta, T epsilon, const Var<T>& mean);

/// tanh(alpha / sqrt(Var(f) + 1e-5) * f) * gamma + beta.
template <typename T>
Var<T> dyn_fit(const Var<T>& f_adv, const Var<T>& alpha, const Var<T>& gamma, const Var<T>& beta,
               VarianceAxes axes = VarianceAxes::kPerFrame);

/// Single-head scaled dot-product attention over the H*W spatial tokens of
/// each frame, embedding dimension C. Returns [B, T, C, H, W].
template <typename T>
Var<T> spatial_attention(const Var<T>& f, const Var<T>& wq, const Var<T>& wk, const Var<T>& wv);

/// x * sigmoid(att) + x
template <typename T>
Var<T> residual_gate(const Var<T>& x, const Var<T>& att);

/// Whole branch: x_s and every intermediate.
template <typename T>
FreqState<T> freq_branch(const Var<T>& x, const FreqParams<T>& p, const dct::DctPlan<T>& plan,
                         VarianceAxes axes = VarianceAxes::kPerFrame);

/// Registers the branch parameters under `prefix` with their initial values:
/// alpha_adv 0.1, beta_adv 0.01, alpha_dyn 1, gamma_dyn 1, beta_dyn 0,
/// identity mixing, attention projections N(0, 0.02^2).
template <typename T>
void register_freq_params(ParameterSet<T>& set, const std::string& prefix, const FreqConfig& cfg,
                          std::uint64_t seed);

template <typename T>
FreqParams<T> bind_freq_params(Graph<T>& g, ParameterSet<T>& set, const std::string& prefix,
                               const FreqConfig& cfg);

}  // namespace hdf::dam
