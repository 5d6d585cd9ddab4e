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
#include <utility>

#include "hdf/diffcore/init.hpp"
#include "hdf/diffcore/ops.hpp"

// Temporal attention branch over [B, T, C, H, W] feature maps.

namespace hdf::dam {

using ad::Graph;
using ad::ParameterSet;
using ad::Tensor;
using ad::Var;

/// Sequences whose descriptor std falls below this are normalized to zero.
inline constexpr double kZscoreGuard = 1e-6;

struct TemporalConfig {
  std::size_t channels = 0;
};

template <typename T>
struct TemporalParams {
  Var<T> alpha, beta, gamma, delta;  // gate weights, each [1]
  Var<T> wq, wk;                     // [C, C]
  Var<T> wv;                         // [C, 1]
};

template <typename T>
struct TemporalState {
  Var<T> a_avg, a_max;       // [B, T]
  Var<T> w_global, d_local;  // [B, T]
  Var<T> gate;               // [B, T]
  Var<T> ta;                 // [B, T]
  Var<T> x_t;                // [B, T, C, H, W]
};

/// Mean and max over (C, H, W) of each frame.
template <typename T>
std::pair<Var<T>, Var<T>> descriptors(const Var<T>& x);

/// w_global = |a - mean_t a|, d_local[t] = |a[t] - a[t-1]| with d_local[0] = 0.
template <typename T>
std::pair<Var<T>, Var<T>> deviations(const Var<T>& a_avg);

/// Per-sequence z-score over t (biased std). Sequences with std < 1e-6 map to 0.
template <typename T>
Var<T> zscore(const Var<T>& a);

/// sigmoid(gamma * (alpha * z(a_avg) + beta * z(a_max)) + delta * w_global - d_local)
template <typename T>
Var<T> temporal_gate(const Var<T>& a_avg, const Var<T>& a_max, const Var<T>& w_global, const Var<T>& d_local,
                     const TemporalParams<T>& p);

/// Gated tokens [B, T, C] -> single-head attention over T -> scores [B, T].
template <typename T>
Var<T> temporal_attention(const Var<T>& tokens, const Var<T>& wq, const Var<T>& wk, const Var<T>& wv);

template <typename T>
TemporalState<T> temporal_branch(const Var<T>& x, const TemporalParams<T>& p);

/// alpha = beta = gamma = 1, delta = 0.5, projections N(0, 0.02^2).
template <typename T>
void register_temporal_params(ParameterSet<T>& set, const std::string& prefix, const TemporalConfig& cfg,
                              std::uint64_t seed);

template <typename T>
TemporalParams<T> bind_temporal_params(Graph<T>& g, ParameterSet<T>& set, const std::string& prefix);

}  // namespace hdf::dam
