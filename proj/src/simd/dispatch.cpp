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

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "backends.hpp"
#include "hdf/simd/kernels.hpp"

namespace hdf::simd {
namespace {

using detail::KernelTable;

bool cpu_has_avx2() {
#if defined(HDF_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend best_available() {
  if (backend_available(Backend::kAvx2)) return Backend::kAvx2;
  if (backend_available(Backend::kNeon)) return Backend::kNeon;
  return Backend::kScalar;
}

Backend initial_backend() {
  const char* env = std::getenv("HDF_SIMD");
  if (env == nullptr) return best_available();
  const std::string want(env);
  if (want == "scalar") return Backend::kScalar;
  if (want == "avx2" && backend_available(Backend::kAvx2)) return Backend::kAvx2;
  if (want == "neon" && backend_available(Backend::kNeon)) return Backend::kNeon;
  return best_available();
}

struct Tables {
  KernelTable<float> f32;
  KernelTable<double> f64;
};

Tables tables_for(Backend b) {
  switch (b) {
#if defined(HDF_BUILD_AVX2)
    case Backend::kAvx2:
      return {detail::avx2::table_f32(), detail::avx2::table_f64()};
#endif
#if defined(HDF_BUILD_NEON)
    case Backend::kNeon:
      return {detail::neon::table_f32(), detail::neon::table_f64()};
#endif
    default:
      return {detail::scalar::table_f32(), detail::scalar::table_f64()};
  }
}

struct State {
  Backend backend;
  Tables tables;
  State() : backend(initial_backend()), tables(tables_for(backend)) {}
};

State& state() {
  static State s;
  return s;
}

template <typename T>
const KernelTable<T>& table();

template <>
const KernelTable<float>& table<float>() {
  return state().tables.f32;
}
template <>
const KernelTable<double>& table<double>() {
  return state().tables.f64;
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kNeon:
      return "neon";
  }
  return "unknown";
}

bool backend_available(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
      return cpu_has_avx2();
    case Backend::kNeon:
#if defined(HDF_BUILD_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend active_backend() { return state().backend; }

void set_backend(Backend b) {
  if (!backend_available(b)) {
    throw std::invalid_argument("simd backend unavailable: " + std::string(backend_name(b)));
  }
  state().backend = b;
  state().tables = tables_for(b);
}

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  return table<T>().dot(a, b, n);
}

template <typename T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  table<T>().axpy(alpha, x, y, n);
}

template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, T alpha,
          const T* a, std::size_t lda, const T* b, std::size_t ldb, T beta, T* c,
          std::size_t ldc) {
  table<T>().gemm(trans_a, trans_b, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

template float dot<float>(const float*, const float*, std::size_t);
template double dot<double>(const double*, const double*, std::size_t);
template void axpy<float>(float, const float*, float*, std::size_t);
template void axpy<double>(double, const double*, double*, std::size_t);
template void gemm<float>(bool, bool, std::size_t, std::size_t, std::size_t, float, const float*,
                          std::size_t, const float*, std::size_t, float, float*, std::size_t);
template void gemm<double>(bool, bool, std::size_t, std::size_t, std::size_t, double,
                           const double*, std::size_t, const double*, std::size_t, double,
                           double*, std::size_t);

}  // namespace hdf::simd
