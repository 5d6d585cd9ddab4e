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

// AVX2 + FMA kernels. This translation unit is the only one compiled with
// -mavx2 -mfma; nothing here may be called unless dispatch has confirmed
// CPU support.

#include <immintrin.h>

#include "backends.hpp"

namespace hdf::simd::detail::avx2 {
namespace {

template <typename T>
struct Vec;

template <>
struct Vec<float> {
  using reg = __m256;
  static constexpr std::size_t kLanes = 8;
  static reg zero() { return _mm256_setzero_ps(); }
  static reg set1(float v) { return _mm256_set1_ps(v); }
  static reg load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, reg v) { _mm256_storeu_ps(p, v); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_ps(a, b, c); }
  static float hsum(reg v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 shuf = _mm_movehdup_ps(lo);
    __m128 sums = _mm_add_ps(lo, shuf);
    shuf = _mm_movehl_ps(shuf, sums);
    sums = _mm_add_ss(sums, shuf);
    return _mm_cvtss_f32(sums);
  }
};

template <>
struct Vec<double> {
  using reg = __m256d;
  static constexpr std::size_t kLanes = 4;
  static reg zero() { return _mm256_setzero_pd(); }
  static reg set1(double v) { return _mm256_set1_pd(v); }
  static reg load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, reg v) { _mm256_storeu_pd(p, v); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_pd(a, b, c); }
  static double hsum(reg v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d high64 = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, high64));
  }
};

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  using V = Vec<T>;
  constexpr std::size_t L = V::kLanes;
  auto acc0 = V::zero();
  auto acc1 = V::zero();
  std::size_t i = 0;
  for (; i + 2 * L <= n; i += 2 * L) {
    acc0 = V::fmadd(V::load(a + i), V::load(b + i), acc0);
    acc1 = V::fmadd(V::load(a + i + L), V::load(b + i + L), acc1);
  }
  for (; i + L <= n; i += L) acc0 = V::fmadd(V::load(a + i), V::load(b + i), acc0);
  T acc = V::hsum(acc0) + V::hsum(acc1);
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <typename T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  using V = Vec<T>;
  constexpr std::size_t L = V::kLanes;
  const auto va = V::set1(alpha);
  std::size_t i = 0;
  for (; i + L <= n; i += L) V::store(y + i, V::fmadd(va, V::load(x + i), V::load(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// crow += a0*b0 + a1*b1 + a2*b2 + a3*b3 in one pass over crow.
template <typename T>
void axpy4(const T* alphas, const T* b0, const T* b1, const T* b2, const T* b3, T* crow,
           std::size_t n) {
  using V = Vec<T>;
  constexpr std::size_t L = V::kLanes;
  const auto a0 = V::set1(alphas[0]);
  const auto a1 = V::set1(alphas[1]);
  const auto a2 = V::set1(alphas[2]);
  const auto a3 = V::set1(alphas[3]);
  std::size_t j = 0;
  for (; j + L <= n; j += L) {
    auto c = V::load(crow + j);
    c = V::fmadd(a0, V::load(b0 + j), c);
    c = V::fmadd(a1, V::load(b1 + j), c);
    c = V::fmadd(a2, V::load(b2 + j), c);
    c = V::fmadd(a3, V::load(b3 + j), c);
    V::store(crow + j, c);
  }
  for (; j < n; ++j) {
    crow[j] += alphas[0] * b0[j] + alphas[1] * b1[j] + alphas[2] * b2[j] + alphas[3] * b3[j];
  }
}

template <typename T>
void gemm(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k, T alpha, const T* a,
          std::size_t lda, const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc) {
  scale_output(m, n, beta, c, ldc);
  if (!tb) {
    for (std::size_t i = 0; i < m; ++i) {
      T* crow = c + i * ldc;
      auto a_at = [&](std::size_t p) { return alpha * (ta ? a[p * lda + i] : a[i * lda + p]); };
      std::size_t p = 0;
      for (; p + 4 <= k; p += 4) {
        const T alphas[4] = {a_at(p), a_at(p + 1), a_at(p + 2), a_at(p + 3)};
        axpy4(alphas, b + p * ldb, b + (p + 1) * ldb, b + (p + 2) * ldb, b + (p + 3) * ldb, crow,
              n);
      }
      for (; p < k; ++p) axpy(a_at(p), b + p * ldb, crow, n);
    }
    return;
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T acc = T(0);
      if (!ta) {
        acc = dot(a + i * lda, b + j * ldb, k);
      } else {
        for (std::size_t p = 0; p < k; ++p) acc += a[p * lda + i] * b[j * ldb + p];
      }
      c[i * ldc + j] += alpha * acc;
    }
  }
}

template <typename T>
KernelTable<T> make_table() {
  return {&dot<T>, &axpy<T>, &gemm<T>};
}

}  // namespace

KernelTable<float> table_f32() { return make_table<float>(); }
KernelTable<double> table_f64() { return make_table<double>(); }

}  // namespace hdf::simd::detail::avx2
