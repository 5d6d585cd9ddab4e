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

#include <memory>

#include "hdf/diffcore/graph.hpp"

namespace hdf::dct {

using ad::Tensor;
using ad::Var;

/// Orthonormal 2D DCT-II for H x W frames, evaluated separably as
/// X = Bh * x * Bw^T with Bh[u][i] = a(u) cos(pi (2i+1) u / 2H),
/// a(0) = sqrt(1/H), a(u>0) = sqrt(2/H) (likewise for Bw).
///
/// Immutable after construction; copies share the basis matrices and may
/// be used from several threads.
template <typename T>
class DctPlan {
 public:
  DctPlan(std::size_t height, std::size_t width);

  std::size_t height() const { return bases_->h; }
  std::size_t width() const { return bases_->w; }
  /// H x H basis, rows indexed by frequency.
  const Tensor<T>& row_basis() const { return bases_->bh; }
  /// W x W basis, rows indexed by frequency.
  const Tensor<T>& col_basis() const { return bases_->bw; }

  /// Transform of every trailing H x W slice of x (rank >= 2).
  Tensor<T> forward(const Tensor<T>& x) const;
  /// Transpose transform; inverts forward() because the bases are orthonormal.
  Tensor<T> inverse(const Tensor<T>& coeffs) const;

 private:
  struct Bases {
    std::size_t h, w;
    Tensor<T> bh, bw;
  };
  void check(const Tensor<T>& x) const;
  Tensor<T> apply(const Tensor<T>& x, bool transpose) const;

  std::shared_ptr<const Bases> bases_;
};

/// DCT of a single [H, W] frame.
template <typename T>
Tensor<T> dct2(const Tensor<T>& frame);

/// Differentiable framewise DCT over the trailing two axes:
/// [B, T, C, H, W] -> same shape, one transform per (b, t, c) slice. The
/// gradient is the transpose transform of the incoming gradient.
template <typename T>
Var<T> dct_frames(const Var<T>& x, const DctPlan<T>& plan);

template <typename T>
Var<T> dct_frames(const Var<T>& x);

}  // namespace hdf::dct
