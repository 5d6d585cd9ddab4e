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

#include <array>
#include <type_traits>

#include "hdf/diffcore/graph.hpp"

// Differentiable operators over Var. Binary elementwise operators broadcast
// with right-aligned extents; reductions take a list of axes (negative
// counts from the end) and drop them unless keepdims is set.

namespace hdf::ad {

template <typename T>
using Scalar = std::type_identity_t<T>;

template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> div(const Var<T>& a, const Var<T>& b);

template <typename T> Var<T> add_scalar(const Var<T>& a, Scalar<T> c);
template <typename T> Var<T> scale(const Var<T>& a, Scalar<T> c);
template <typename T> Var<T> neg(const Var<T>& a);

template <typename T> Var<T> exp(const Var<T>& a);
template <typename T> Var<T> log(const Var<T>& a);
template <typename T> Var<T> tanh(const Var<T>& a);
template <typename T> Var<T> sigmoid(const Var<T>& a);
template <typename T> Var<T> sqrt(const Var<T>& a);
template <typename T> Var<T> square(const Var<T>& a);
template <typename T> Var<T> abs(const Var<T>& a);
/// x * sigmoid(x)
template <typename T> Var<T> silu(const Var<T>& a);
/// Elementwise sign in {-1, 0, 1}. Carries no gradient.
template <typename T> Var<T> sign(const Var<T>& a);
/// Same value, cut from the gradient path.
template <typename T> Var<T> detach(const Var<T>& a);

template <typename T> Var<T> sum(const Var<T>& a, const Axes& axes, bool keepdims = false);
template <typename T> Var<T> mean(const Var<T>& a, const Axes& axes, bool keepdims = false);
/// Gradient flows to the first maximal element.
template <typename T> Var<T> max(const Var<T>& a, const Axes& axes, bool keepdims = false);
/// Biased (1/N) variance.
template <typename T> Var<T> variance(const Var<T>& a, const Axes& axes, bool keepdims = false);
/// Euclidean norm over axes; the gradient at a zero norm is taken as zero.
template <typename T> Var<T> l2_norm(const Var<T>& a, const Axes& axes, bool keepdims = false);
template <typename T> Var<T> sum_all(const Var<T>& a);
template <typename T> Var<T> mean_all(const Var<T>& a);

template <typename T> Var<T> softmax(const Var<T>& a, int axis);
template <typename T> Var<T> log_softmax(const Var<T>& a, int axis);

/// op(a) @ op(b) for rank-2 operands, or batched when either is rank 3
/// (a rank-2 side is shared across the batch).
template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b, bool trans_a = false, bool trans_b = false);

/// 1x1 channel mixing: out[..., o, ...] = sum_c w[o, c] * x[..., c, ...].
template <typename T> Var<T> channel_mix(const Var<T>& x, const Var<T>& w, int axis);

struct Conv3dOptions {
  std::array<std::size_t, 3> stride{1, 1, 1};   // t, h, w
  std::array<std::size_t, 3> padding{0, 0, 0};  // zero padding
};

/// x: [B, T, Cin, H, W], w: [Cout, Cin, kt, kh, kw] -> [B, T', Cout, H', W'].
template <typename T> Var<T> conv3d(const Var<T>& x, const Var<T>& w, const Conv3dOptions& opt);

template <typename T> Var<T> reshape(const Var<T>& a, Shape shape);
template <typename T> Var<T> permute(const Var<T>& a, const std::vector<std::size_t>& perm);
template <typename T> Var<T> slice(const Var<T>& a, int axis, std::size_t start, std::size_t length);
template <typename T> Var<T> concat(const std::vector<Var<T>>& parts, int axis);
template <typename T> Var<T> broadcast_to(const Var<T>& a, const Shape& shape);

template <typename T> Var<T> operator+(const Var<T>& a, const Var<T>& b) { return add(a, b); }
template <typename T> Var<T> operator-(const Var<T>& a, const Var<T>& b) { return sub(a, b); }
template <typename T> Var<T> operator*(const Var<T>& a, const Var<T>& b) { return mul(a, b); }
template <typename T> Var<T> operator/(const Var<T>& a, const Var<T>& b) { return div(a, b); }
template <typename T> Var<T> operator-(const Var<T>& a) { return neg(a); }
template <typename T> Var<T> operator+(const Var<T>& a, Scalar<T> c) { return add_scalar(a, c); }
template <typename T> Var<T> operator+(Scalar<T> c, const Var<T>& a) { return add_scalar(a, c); }
template <typename T> Var<T> operator-(const Var<T>& a, Scalar<T> c) { return add_scalar(a, -c); }
template <typename T> Var<T> operator-(Scalar<T> c, const Var<T>& a) { return add_scalar(neg(a), c); }
template <typename T> Var<T> operator*(const Var<T>& a, Scalar<T> c) { return scale(a, c); }
template <typename T> Var<T> operator*(Scalar<T> c, const Var<T>& a) { return scale(a, c); }
template <typename T> Var<T> operator/(const Var<T>& a, Scalar<T> c) { return scale(a, Scalar<T>(1) / c); }

/// Extents of a with b broadcast against it; throws ShapeError(op, ...).
Shape broadcast_shape(std::string_view op, const Shape& a, const Shape& b);

}  // namespace hdf::ad
