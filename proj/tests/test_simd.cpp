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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "hdf/diffcore/init.hpp"
#include "hdf/simd/kernels.hpp"

using namespace hdf;

namespace {

// Restores the startup backend when a test leaves.
struct BackendGuard {
  simd::Backend saved = simd::active_backend();
  ~BackendGuard() { simd::set_backend(saved); }
};

std::vector<simd::Backend> vector_backends() {
  std::vector<simd::Backend> out;
  for (auto b : {simd::Backend::kAvx2, simd::Backend::kNeon})
    if (simd::backend_available(b)) out.push_back(b);
  return out;
}

template <typename T>
std::vector<T> rand_vec(std::size_t n, ad::Rng& rng) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(rng.uniform(-1, 1));
  return v;
}

template <typename T>
double max_rel(const std::vector<T>& a, const std::vector<T>& b) {
  double num = 0, den = 1e-30;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
    den = std::max(den, std::abs(static_cast<double>(b[i])));
  }
  return num / den;
}

template <typename T>
void compare_kernels(simd::Backend vec, double tol) {
  ad::Rng rng(99, "simd");
  for (int rep = 0; rep < 40; ++rep) {
    // odd sizes exercise the scalar tails
    const std::size_t m = 1 + rng.below(9), n = 1 + rng.below(37), k = 1 + rng.below(29);
    const bool ta = rng.below(2), tb = rng.below(2);
    const T alpha = static_cast<T>(rng.uniform(-2, 2)), beta = rep % 3 == 0 ? T(0) : static_cast<T>(rng.uniform(-1, 1));
    const auto a = rand_vec<T>(m * k, rng), b = rand_vec<T>(k * n, rng), c0 = rand_vec<T>(m * n, rng);
    const std::size_t lda = ta ? m : k, ldb = tb ? k : n;
    std::vector<T> c_ref = c0, c_vec = c0;
    simd::set_backend(simd::Backend::kScalar);
    simd::gemm<T>(ta, tb, m, n, k, alpha, a.data(), lda, b.data(), ldb, beta, c_ref.data(), n);
    const T d_ref = simd::dot<T>(a.data(), b.data(), std::min(a.size(), b.size()));
    std::vector<T> y_ref = c0;
    simd::axpy<T>(alpha, b.data(), y_ref.data(), std::min(b.size(), y_ref.size()));

    simd::set_backend(vec);
    simd::gemm<T>(ta, tb, m, n, k, alpha, a.data(), lda, b.data(), ldb, beta, c_vec.data(), n);
    const T d_vec = simd::dot<T>(a.data(), b.data(), std::min(a.size(), b.size()));
    std::vector<T> y_vec = c0;
    simd::axpy<T>(alpha, b.data(), y_vec.data(), std::min(b.size(), y_vec.size()));

    INFO("m=" << m << " n=" << n << " k=" << k << " ta=" << ta << " tb=" << tb);
    CHECK(max_rel(c_vec, c_ref) < tol);
    CHECK(std::abs(static_cast<double>(d_vec - d_ref)) < tol * (1 + std::abs(static_cast<double>(d_ref))) * 10);
    CHECK(max_rel(y_vec, y_ref) < tol);
  }
}

}  // namespace

TEST_CASE("scalar backend is always available and selectable") {
  BackendGuard guard;
  CHECK(simd::backend_available(simd::Backend::kScalar));
  simd::set_backend(simd::Backend::kScalar);
  CHECK(simd::active_backend() == simd::Backend::kScalar);
  CHECK(simd::backend_name(simd::Backend::kScalar) == "scalar");
}

TEST_CASE("unavailable backends are rejected") {
  BackendGuard guard;
  for (auto b : {simd::Backend::kAvx2, simd::Backend::kNeon}) {
    if (!simd::backend_available(b)) CHECK_THROWS_AS(simd::set_backend(b), std::invalid_argument);
  }
}

TEST_CASE("vector kernels match the scalar reference") {
  BackendGuard guard;
  const auto backends = vector_backends();
  if (backends.empty()) MESSAGE("no vector backend on this machine; nothing to compare");
  for (auto b : backends) {
    INFO(simd::backend_name(b));
    compare_kernels<float>(b, 1e-5);
    compare_kernels<double>(b, 1e-13);
  }
}

TEST_CASE("beta zero overwrites non-finite output") {
  BackendGuard guard;
  std::vector<simd::Backend> all{simd::Backend::kScalar};
  for (auto b : vector_backends()) all.push_back(b);
  for (auto b : all) {
    simd::set_backend(b);
    const std::vector<double> a{1, 2}, x{3, 4};
    std::vector<double> c{NAN};
    simd::gemm<double>(false, false, 1, 1, 2, 1.0, a.data(), 2, x.data(), 1, 0.0, c.data(), 1);
    CHECK(c[0] == 11.0);
  }
}
