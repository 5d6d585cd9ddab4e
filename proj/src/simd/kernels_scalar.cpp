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

// Reference kernels. Plain loops in a fixed order; the vector backends are
// tested against these.

#include "backends.hpp"

namespace hdf::simd::detail::scalar {
namespace {

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  T acc = T(0);
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <typename T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
void gemm(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k, T alpha, const T* a,
          std::size_t lda, const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc) {
  scale_output(m, n, beta, c, ldc);
  if (!tb) {
    for (std::size_t i = 0; i < m; ++i) {
      T* crow = c + i * ldc;
      for (std::size_t p = 0; p < k; ++p) {
        const T aip = alpha * (ta ? a[p * lda + i] : a[i * lda + p]);
        axpy(aip, b + p * ldb, crow, n);
      }
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

}  // namespace hdf::simd::detail::scalar
