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
#include <string_view>

// Dense arithmetic inner loops. Every kernel exists as a scalar reference
// and, where the build and the CPU allow, as a vectorized variant. The
// variant is chosen once at first use (HDF_SIMD=scalar|avx2|neon|auto
// overrides) and stays fixed for the process, so results are reproducible
// run to run on the same machine.

namespace hdf::simd {

enum class Backend { kScalar, kAvx2, kNeon };

std::string_view backend_name(Backend b);

/// True when the backend was compiled in and the running CPU supports it.
bool backend_available(Backend b);

Backend active_backend();

/// Forces a backend. Throws std::invalid_argument if it is unavailable.
void set_backend(Backend b);

template <typename T>
T dot(const T* a, const T* b, std::size_t n);

/// y += alpha * x
template <typename T>
void axpy(T alpha, const T* x, T* y, std::size_t n);

/// Row-major C = alpha * op(A) * op(B) + beta * C, op(A) is m x k and
/// op(B) is k x n. beta == 0 overwrites C without reading it.
template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, T alpha,
          const T* a, std::size_t lda, const T* b, std::size_t ldb, T beta, T* c,
          std::size_t ldc);

}  // namespace hdf::simd
