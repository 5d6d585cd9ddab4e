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

#include <cstddef>

namespace hdf::simd::detail {

template <typename T>
struct KernelTable {
  T (*dot)(const T*, const T*, std::size_t);
  void (*axpy)(T, const T*, T*, std::size_t);
  void (*gemm)(bool, bool, std::size_t, std::size_t, std::size_t, T, const T*, std::size_t,
               const T*, std::size_t, T, T*, std::size_t);
};

namespace scalar {
KernelTable<float> table_f32();
KernelTable<double> table_f64();
}  // namespace scalar

#if defined(HDF_BUILD_AVX2)
namespace avx2 {
KernelTable<float> table_f32();
KernelTable<double> table_f64();
}  // namespace avx2
#endif

#if defined(HDF_BUILD_NEON)
namespace neon {
KernelTable<float> table_f32();
KernelTable<double> table_f64();
}  // namespace neon
#endif

// Shared by every backend: prepares C for accumulation.
template <typename T>
inline void scale_output(std::size_t m, std::size_t n, T beta, T* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    T* row = c + i * ldc;
    if (beta == T(0)) {
      for (std::size_t j = 0; j < n; ++j) row[j] = T(0);
    } else if (beta != T(1)) {
      for (std::size_t j = 0; j < n; ++j) row[j] *= beta;
    }
  }
}

}  // namespace hdf::simd::detail
