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

#include "hdf/dct.hpp"

#include <cmath>
#include <numbers>

#include "hdf/simd/kernels.hpp"

namespace hdf::dct {
namespace {

template <typename T>
Tensor<T> basis(std::size_t n) {
  Tensor<T> b(ad::Shape{n, n});
  const double nd = static_cast<double>(n);
  for (std::size_t u = 0; u < n; ++u) {
    const double a = u == 0 ? std::sqrt(1.0 / nd) : std::sqrt(2.0 / nd);
    for (std::size_t i = 0; i < n; ++i) {
      const double arg = std::numbers::pi * (2.0 * static_cast<double>(i) + 1.0) * static_cast<double>(u) / (2.0 * nd);
      b[u * n + i] = static_cast<T>(a * std::cos(arg));
    }
  }
  return b;
}

}  // namespace

template <typename T>
DctPlan<T>::DctPlan(std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) throw ad::ShapeError("dct2", "frame extents must be positive");
  bases_ = std::make_shared<const Bases>(Bases{height, width, basis<T>(height), basis<T>(width)});
}

template <typename T>
void DctPlan<T>::check(const Tensor<T>& x) const {
  const auto& s = x.shape();
  if (s.size() < 2 || s[s.size() - 2] != height() || s[s.size() - 1] != width()) {
    throw ad::ShapeError("dct2", "plan is " + std::to_string(height()) + "x" + std::to_string(width()) +
                                     ", input " + ad::to_string(s));
  }
}

template <typename T>
Tensor<T> DctPlan<T>::apply(const Tensor<T>& x, bool transpose) const {
  check(x);
  const std::size_t h = height(), w = width();
  const std::size_t slices = x.size() / (h * w);
  const T* bh = bases_->bh.data();
  const T* bw = bases_->bw.data();
  // Columns first over all slices at once, then rows slice by slice.
  Tensor<T> tmp(x.shape());
  simd::gemm<T>(false, !transpose, slices * h, w, w, T(1), x.data(), w, bw, w, T(0), tmp.data(), w);
  Tensor<T> y(x.shape());
  for (std::size_t s = 0; s < slices; ++s) {
    simd::gemm<T>(transpose, false, h, w, h, T(1), bh, h, tmp.data() + s * h * w, w, T(0), y.data() + s * h * w, w);
  }
  return y;
}

template <typename T>
Tensor<T> DctPlan<T>::forward(const Tensor<T>& x) const {
  return apply(x, false);
}

template <typename T>
Tensor<T> DctPlan<T>::inverse(const Tensor<T>& coeffs) const {
  return apply(coeffs, true);
}

template <typename T>
Tensor<T> dct2(const Tensor<T>& frame) {
  if (frame.rank() != 2) throw ad::ShapeError("dct2", "expected [H,W], got " + ad::to_string(frame.shape()));
  return DctPlan<T>(frame.shape()[0], frame.shape()[1]).forward(frame);
}

template <typename T>
Var<T> dct_frames(const Var<T>& x, const DctPlan<T>& plan) {
  Tensor<T> y = plan.forward(x.value());
  return x.graph()->record("dct_frames", std::move(y), {x}, [plan](ad::BackwardContext<T>& ctx) {
    const Tensor<T> g(ctx.out().shape(), std::vector<T>(ctx.out_grad().begin(), ctx.out_grad().end()));
    const Tensor<T> gx = plan.inverse(g);
    auto acc = ctx.in_grad(0);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += gx[i];
  });
}

template <typename T>
Var<T> dct_frames(const Var<T>& x) {
  const auto& s = x.shape();
  if (s.size() < 2) throw ad::ShapeError("dct2", "input rank below 2: " + ad::to_string(s));
  return dct_frames(x, DctPlan<T>(s[s.size() - 2], s[s.size() - 1]));
}

template class DctPlan<float>;
template class DctPlan<double>;
template Tensor<float> dct2(const Tensor<float>&);
template Tensor<double> dct2(const Tensor<double>&);
template Var<float> dct_frames(const Var<float>&, const DctPlan<float>&);
template Var<double> dct_frames(const Var<double>&, const DctPlan<double>&);
template Var<float> dct_frames(const Var<float>&);
template Var<double> dct_frames(const Var<double>&);

}  // namespace hdf::dct
