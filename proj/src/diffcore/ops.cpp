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

#include "hdf/diffcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "hdf/simd/kernels.hpp"

namespace hdf::ad {
namespace {

using Strides = std::vector<std::size_t>;

// Visits every index of `shape` in row-major order, calling f(linear, ia, ib)
// where ia/ib are offsets under the strides sa/sb (0 marks a broadcast axis).
template <class F>
void for_each_index(const Shape& shape_in, const Strides& sa_in, const Strides& sb_in, F&& f) {
  // Merge neighbouring axes that both operands walk contiguously, so the
  // inner loop runs as long as possible.
  Shape shape;
  Strides sa, sb;
  for (std::size_t d = 0; d < shape_in.size(); ++d) {
    if (shape_in[d] == 1) continue;
    if (!shape.empty() && sa.back() == sa_in[d] * shape_in[d] && sb.back() == sb_in[d] * shape_in[d]) {
      shape.back() *= shape_in[d];
      sa.back() = sa_in[d];
      sb.back() = sb_in[d];
      continue;
    }
    shape.push_back(shape_in[d]);
    sa.push_back(sa_in[d]);
    sb.push_back(sb_in[d]);
  }
  const std::size_t r = shape.size();
  if (r == 0) {
    f(std::size_t{0}, std::size_t{0}, std::size_t{0});
    return;
  }
  const std::size_t inner = shape[r - 1];
  const std::size_t step_a = sa[r - 1];
  const std::size_t step_b = sb[r - 1];
  const std::size_t outer = numel(shape) / inner;
  std::vector<std::size_t> idx(r, 0);
  std::size_t o = 0, oa = 0, ob = 0;
  for (std::size_t blk = 0; blk < outer; ++blk) {
    if (step_a == 1 && step_b == 1) {
      for (std::size_t j = 0; j < inner; ++j) f(o + j, oa + j, ob + j);
    } else if (step_a == 1 && step_b == 0) {
      for (std::size_t j = 0; j < inner; ++j) f(o + j, oa + j, ob);
    } else if (step_a == 0 && step_b == 1) {
      for (std::size_t j = 0; j < inner; ++j) f(o + j, oa, ob + j);
    } else {
      for (std::size_t j = 0; j < inner; ++j) f(o + j, oa + j * step_a, ob + j * step_b);
    }
    o += inner;
    for (std::size_t d = r - 1; d-- > 0;) {
      ++idx[d];
      oa += sa[d];
      ob += sb[d];
      if (idx[d] < shape[d]) break;
      oa -= sa[d] * shape[d];
      ob -= sb[d] * shape[d];
      idx[d] = 0;
    }
  }
}

// Strides of `in` viewed inside the (higher or equal rank) `out` extents,
// with zero stride on broadcast axes.
Strides broadcast_strides(const Shape& in, const Shape& out) {
  Strides st(out.size(), 0);
  const Strides own = strides_of(in);
  const std::size_t lead = out.size() - in.size();
  for (std::size_t d = 0; d < in.size(); ++d) {
    st[lead + d] = (in[d] == 1 && out[lead + d] != 1) ? 0 : own[d];
    if (in[d] == 1) st[lead + d] = 0;
  }
  return st;
}

std::size_t norm_axis(std::string_view op, int axis, std::size_t rank) {
  const int r = static_cast<int>(rank);
  const int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) {
    throw ShapeError(op, "axis " + std::to_string(axis) + " out of range for rank " +
                             std::to_string(rank));
  }
  return static_cast<std::size_t>(a);
}

struct ReducePlan {
  Shape kept;        // reduced axes set to 1
  Shape out;         // final shape (keepdims applied)
  Strides to_out;    // input index -> output offset strides
  std::size_t count; // elements folded into each output
};

ReducePlan plan_reduce(std::string_view op, const Shape& in, const Axes& axes, bool keepdims) {
  std::vector<bool> reduced(in.size(), false);
  for (int ax : axes) reduced[norm_axis(op, ax, in.size())] = true;
  ReducePlan p;
  p.kept = in;
  p.count = 1;
  for (std::size_t d = 0; d < in.size(); ++d) {
    if (reduced[d]) {
      p.count *= in[d];
      p.kept[d] = 1;
    } else if (!keepdims) {
      p.out.push_back(in[d]);
    }
  }
  if (keepdims) p.out = p.kept;
  p.to_out = broadcast_strides(p.kept, in);
  return p;
}

template <typename T, class Fwd, class Bwd>
Var<T> unary(std::string_view op, const Var<T>& a, Fwd fwd, Bwd dydx) {
  const Tensor<T>& x = a.value();
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  return a.graph()->record(op, std::move(y), {a}, [dydx](BackwardContext<T>& ctx) {
    const auto g = ctx.out_grad();
    const Tensor<T>& xv = ctx.in(0);
    const Tensor<T>& yv = ctx.out();
    auto gx = ctx.in_grad(0);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * dydx(xv[i], yv[i]);
  });
}

enum class BinOp { kAdd, kSub, kMul, kDiv };

template <typename T>
Var<T> binary(std::string_view op, BinOp kind, const Var<T>& a, const Var<T>& b) {
  if (a.graph() != b.graph()) throw GraphError(std::string(op) + ": operands from different graphs");
  const Shape out_shape = broadcast_shape(op, a.shape(), b.shape());
  const Strides sa = broadcast_strides(a.shape(), out_shape);
  const Strides sb = broadcast_strides(b.shape(), out_shape);
  const T* av = a.value().data();
  const T* bv = b.value().data();
  Tensor<T> y(out_shape);
  T* yv = y.data();
  switch (kind) {
    case BinOp::kAdd:
      for_each_index(out_shape, sa, sb, [&](std::size_t o, std::size_t i, std::size_t j) { yv[o] = av[i] + bv[j]; });
      break;
    case BinOp::kSub:
      for_each_index(out_shape, sa, sb, [&](std::size_t o, std::size_t i, std::size_t j) { yv[o] = av[i] - bv[j]; });
      break;
    case BinOp::kMul:
      for_each_index(out_shape, sa, sb, [&](std::size_t o, std::size_t i, std::size_t j) { yv[o] = av[i] * bv[j]; });
      break;
    case BinOp::kDiv:
      for_each_index(out_shape, sa, sb, [&](std::size_t o, std::size_t i, std::size_t j) { yv[o] = av[i] / bv[j]; });
      break;
  }
  return a.graph()->record(op, std::move(y), {a, b}, [kind, out_shape, sa, sb](BackwardContext<T>& ctx) {
    const T* g = ctx.out_grad().data();
    const T* x0 = ctx.in(0).data();
    const T* x1 = ctx.in(1).data();
    if (ctx.needs(0)) {
      T* g0 = ctx.in_grad(0).data();
      switch (kind) {
        case BinOp::kAdd:
        case BinOp::kSub:
          for_each_index(out_shape, sa, sb, [&](std::size_t o, std::size_t i, std::size_t) { g0[i] += g[o]; });
          break;
        case BinOp::kMul:
          for_each_index(out_shape, sa, sb, [&](std::size_t o, std::size_t i, std::size_t j) { g0[i] += g[o] * x1[j]; });
          break;
        case BinOp::kDiv:
          for_each_index(out_shape, sa, sb, [&](std::size_t o, std::size_t i, std::size_t j) { g0[i] += g[o] / x1[j]; });
          break;
      }
    }
    if (ctx.needs(1)) {
      T* g1 = ctx.in_grad(1).data();
      switch (kind) {
        case BinOp::kAdd:
          for_each_index(out_shape, sa, sb, [&](std::size_t o, std::size_t, std::size_t j) { g1[j] += g[o]; });
          break;
        case BinOp::kSub:
          for_each_index(out_shape, sa, sb, [&](std::size_t o, std::size_t, std::size_t j) { g1[j] -= g[o]; });
          break;
        case BinOp::kMul:
          for_each_index(out_shape, sa, sb, [&](std::size_t o, std::size_t i, std::size_t j) { g1[j] += g[o] * x0[i]; });
          break;
        case BinOp::kDiv:
          for_each_index(out_shape, sa, sb, [&](std::size_t o, std::size_t i, std::size_t j) {
            g1[j] -= g[o] * x0[i] / (x1[j] * x1[j]);
          });
          break;
      }
    }
  });
}

}  // namespace

Shape broadcast_shape(std::string_view op, const Shape& a, const Shape& b) {
  const std::size_t r = std::max(a.size(), b.size());
  Shape out(r);
  for (std::size_t d = 0; d < r; ++d) {
    const std::size_t da = d < r - a.size() ? 1 : a[d - (r - a.size())];
    const std::size_t db = d < r - b.size() ? 1 : b[d - (r - b.size())];
    if (da == db || db == 1) {
      out[d] = da;
    } else if (da == 1) {
      out[d] = db;
    } else {
      throw ShapeError(op, "cannot broadcast " + to_string(a) + " with " + to_string(b));
    }
  }
  return out;
}

template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b) { return binary("add", BinOp::kAdd, a, b); }
template <typename T> Var<T> sub(const Var<T>& a, const Var<T>& b) { return binary("sub", BinOp::kSub, a, b); }
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b) { return binary("mul", BinOp::kMul, a, b); }
template <typename T> Var<T> div(const Var<T>& a, const Var<T>& b) { return binary("div", BinOp::kDiv, a, b); }

template <typename T>
Var<T> add_scalar(const Var<T>& a, Scalar<T> c) {
  return unary<T>("add_scalar", a, [c](T x) { return x + c; }, [](T, T) { return T(1); });
}

template <typename T>
Var<T> scale(const Var<T>& a, Scalar<T> c) {
  return unary<T>("scale", a, [c](T x) { return x * c; }, [c](T, T) { return c; });
}

template <typename T>
Var<T> neg(const Var<T>& a) {
  return unary<T>("neg", a, [](T x) { return -x; }, [](T, T) { return T(-1); });
}

template <typename T>
Var<T> exp(const Var<T>& a) {
  return unary<T>("exp", a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Var<T> log(const Var<T>& a) {
  return unary<T>("log", a, [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}

template <typename T>
Var<T> tanh(const Var<T>& a) {
  return unary<T>("tanh", a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Var<T> sigmoid(const Var<T>& a) {
  return unary<T>(
      "sigmoid", a,
      [](T x) {
        if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
        const T e = std::exp(x);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> sqrt(const Var<T>& a) {
  return unary<T>("sqrt", a, [](T x) { return std::sqrt(x); },
                  [](T, T y) { return y > T(0) ? T(0.5) / y : T(0); });
}

template <typename T>
Var<T> square(const Var<T>& a) {
  return unary<T>("square", a, [](T x) { return x * x; }, [](T x, T) { return T(2) * x; });
}

template <typename T>
Var<T> abs(const Var<T>& a) {
  return unary<T>("abs", a, [](T x) { return std::abs(x); },
                  [](T x, T) { return x > T(0) ? T(1) : (x < T(0) ? T(-1) : T(0)); });
}

template <typename T>
Var<T> silu(const Var<T>& a) {
  auto sig = [](T x) {
    if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
    const T e = std::exp(x);
    return e / (T(1) + e);
  };
  return unary<T>("silu", a, [sig](T x) { return x * sig(x); },
                  [sig](T x, T) {
                    const T s = sig(x);
                    return s * (T(1) + x * (T(1) - s));
                  });
}

template <typename T>
Var<T> sign(const Var<T>& a) {
  const Tensor<T>& x = a.value();
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? T(1) : (x[i] < T(0) ? T(-1) : T(0));
  return a.graph()->constant(std::move(y));
}

template <typename T>
Var<T> detach(const Var<T>& a) {
  return a.graph()->constant(a.value());
}

template <typename T>
Var<T> sum(const Var<T>& a, const Axes& axes, bool keepdims) {
  const ReducePlan p = plan_reduce("sum", a.shape(), axes, keepdims);
  const Tensor<T>& x = a.value();
  Tensor<T> y(p.out);
  const Strides none(x.rank(), 0);
  for_each_index(x.shape(), none, p.to_out, [&](std::size_t i, std::size_t, std::size_t o) { y[o] += x[i]; });
  const Shape in_shape = x.shape();
  return a.graph()->record("sum", std::move(y), {a}, [p, in_shape, none](BackwardContext<T>& ctx) {
    const auto g = ctx.out_grad();
    auto gx = ctx.in_grad(0);
    for_each_index(in_shape, none, p.to_out, [&](std::size_t i, std::size_t, std::size_t o) { gx[i] += g[o]; });
  });
}

template <typename T>
Var<T> mean(const Var<T>& a, const Axes& axes, bool keepdims) {
  const ReducePlan p = plan_reduce("mean", a.shape(), axes, keepdims);
  return scale(sum(a, axes, keepdims), T(1) / static_cast<T>(p.count));
}

template <typename T>
Var<T> max(const Var<T>& a, const Axes& axes, bool keepdims) {
  const ReducePlan p = plan_reduce("max", a.shape(), axes, keepdims);
  const Tensor<T>& x = a.value();
  Tensor<T> y(p.out, -std::numeric_limits<T>::infinity());
  auto arg = std::make_shared<std::vector<std::size_t>>(y.size(), 0);
  const Strides none(x.rank(), 0);
  for_each_index(x.shape(), none, p.to_out, [&](std::size_t i, std::size_t, std::size_t o) {
    if (x[i] > y[o]) {
      y[o] = x[i];
      (*arg)[o] = i;
    }
  });
  return a.graph()->record("max", std::move(y), {a}, [arg](BackwardContext<T>& ctx) {
    const auto g = ctx.out_grad();
    auto gx = ctx.in_grad(0);
    for (std::size_t o = 0; o < g.size(); ++o) gx[(*arg)[o]] += g[o];
  });
}

template <typename T>
Var<T> variance(const Var<T>& a, const Axes& axes, bool keepdims) {
  const Var<T> centered = sub(a, mean(a, axes, true));
  return mean(square(centered), axes, keepdims);
}

template <typename T>
Var<T> l2_norm(const Var<T>& a, const Axes& axes, bool keepdims) {
  const ReducePlan p = plan_reduce("l2_norm", a.shape(), axes, keepdims);
  const Tensor<T>& x = a.value();
  Tensor<T> y(p.out);
  const Strides none(x.rank(), 0);
  for_each_index(x.shape(), none, p.to_out, [&](std::size_t i, std::size_t, std::size_t o) { y[o] += x[i] * x[i]; });
  for (std::size_t o = 0; o < y.size(); ++o) y[o] = std::sqrt(y[o]);
  const Shape in_shape = x.shape();
  return a.graph()->record("l2_norm", std::move(y), {a}, [p, in_shape, none](BackwardContext<T>& ctx) {
    const auto g = ctx.out_grad();
    const Tensor<T>& xv = ctx.in(0);
    const Tensor<T>& n = ctx.out();
    auto gx = ctx.in_grad(0);
    for_each_index(in_shape, none, p.to_out, [&](std::size_t i, std::size_t, std::size_t o) {
      if (n[o] > T(0)) gx[i] += g[o] * xv[i] / n[o];
    });
  });
}

template <typename T>
Var<T> sum_all(const Var<T>& a) {
  Axes all(a.shape().size());
  for (std::size_t d = 0; d < all.size(); ++d) all[d] = static_cast<int>(d);
  return sum(a, all, false);
}

template <typename T>
Var<T> mean_all(const Var<T>& a) {
  return scale(sum_all(a), T(1) / static_cast<T>(a.size()));
}

namespace {

struct AxisSplit {
  std::size_t outer, len, inner;
};

AxisSplit split_at(std::string_view op, const Shape& s, int axis) {
  const std::size_t ax = norm_axis(op, axis, s.size());
  AxisSplit sp{1, s[ax], 1};
  for (std::size_t d = 0; d < ax; ++d) sp.outer *= s[d];
  for (std::size_t d = ax + 1; d < s.size(); ++d) sp.inner *= s[d];
  return sp;
}

}  // namespace

template <typename T>
Var<T> softmax(const Var<T>& a, int axis) {
  const AxisSplit sp = split_at("softmax", a.shape(), axis);
  const Tensor<T>& x = a.value();
  Tensor<T> y(x.shape());
  for (std::size_t o = 0; o < sp.outer; ++o) {
    for (std::size_t i = 0; i < sp.inner; ++i) {
      const std::size_t base = o * sp.len * sp.inner + i;
      T m = -std::numeric_limits<T>::infinity();
      for (std::size_t k = 0; k < sp.len; ++k) m = std::max(m, x[base + k * sp.inner]);
      T z = T(0);
      for (std::size_t k = 0; k < sp.len; ++k) {
        const T e = std::exp(x[base + k * sp.inner] - m);
        y[base + k * sp.inner] = e;
        z += e;
      }
      for (std::size_t k = 0; k < sp.len; ++k) y[base + k * sp.inner] /= z;
    }
  }
  return a.graph()->record("softmax", std::move(y), {a}, [sp](BackwardContext<T>& ctx) {
    const auto g = ctx.out_grad();
    const Tensor<T>& yv = ctx.out();
    auto gx = ctx.in_grad(0);
    for (std::size_t o = 0; o < sp.outer; ++o) {
      for (std::size_t i = 0; i < sp.inner; ++i) {
        const std::size_t base = o * sp.len * sp.inner + i;
        T dotp = T(0);
        for (std::size_t k = 0; k < sp.len; ++k) dotp += g[base + k * sp.inner] * yv[base + k * sp.inner];
        for (std::size_t k = 0; k < sp.len; ++k) {
          const std::size_t idx = base + k * sp.inner;
          gx[idx] += yv[idx] * (g[idx] - dotp);
        }
      }
    }
  });
}

template <typename T>
Var<T> log_softmax(const Var<T>& a, int axis) {
  const AxisSplit sp = split_at("log_softmax", a.shape(), axis);
  const Tensor<T>& x = a.value();
  Tensor<T> y(x.shape());
  for (std::size_t o = 0; o < sp.outer; ++o) {
    for (std::size_t i = 0; i < sp.inner; ++i) {
      const std::size_t base = o * sp.len * sp.inner + i;
      T m = -std::numeric_limits<T>::infinity();
      for (std::size_t k = 0; k < sp.len; ++k) m = std::max(m, x[base + k * sp.inner]);
      T z = T(0);
      for (std::size_t k = 0; k < sp.len; ++k) z += std::exp(x[base + k * sp.inner] - m);
      const T lse = m + std::log(z);
      for (std::size_t k = 0; k < sp.len; ++k) y[base + k * sp.inner] = x[base + k * sp.inner] - lse;
    }
  }
  return a.graph()->record("log_softmax", std::move(y), {a}, [sp](BackwardContext<T>& ctx) {
    const auto g = ctx.out_grad();
    const Tensor<T>& yv = ctx.out();
    auto gx = ctx.in_grad(0);
    for (std::size_t o = 0; o < sp.outer; ++o) {
      for (std::size_t i = 0; i < sp.inner; ++i) {
        const std::size_t base = o * sp.len * sp.inner + i;
        T gs = T(0);
        for (std::size_t k = 0; k < sp.len; ++k) gs += g[base + k * sp.inner];
        for (std::size_t k = 0; k < sp.len; ++k) {
          const std::size_t idx = base + k * sp.inner;
          gx[idx] += g[idx] - std::exp(yv[idx]) * gs;
        }
      }
    }
  });
}

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b, bool ta, bool tb) {
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  if ((as.size() != 2 && as.size() != 3) || (bs.size() != 2 && bs.size() != 3)) {
    throw ShapeError("matmul", "operands must be rank 2 or 3: " + to_string(as) + " x " + to_string(bs));
  }
  const std::size_t batch_a = as.size() == 3 ? as[0] : 1;
  const std::size_t batch_b = bs.size() == 3 ? bs[0] : 1;
  if (as.size() == 3 && bs.size() == 3 && batch_a != batch_b) {
    throw ShapeError("matmul", "batch mismatch " + to_string(as) + " x " + to_string(bs));
  }
  const std::size_t batch = std::max(batch_a, batch_b);
  const std::size_t ar = as[as.size() - 2], ac = as[as.size() - 1];
  const std::size_t br = bs[bs.size() - 2], bc = bs[bs.size() - 1];
  const std::size_t m = ta ? ac : ar;
  const std::size_t k = ta ? ar : ac;
  const std::size_t kb = tb ? bc : br;
  const std::size_t n = tb ? br : bc;
  if (k != kb) {
    throw ShapeError("matmul", "inner extents differ: " + to_string(as) + (ta ? "^T" : "") + " x " +
                                   to_string(bs) + (tb ? "^T" : ""));
  }
  const std::size_t a_step = as.size() == 3 ? ar * ac : 0;
  const std::size_t b_step = bs.size() == 3 ? br * bc : 0;
  const std::size_t lda = ac, ldb = bc;
  Shape out_shape = (as.size() == 3 || bs.size() == 3) ? Shape{batch, m, n} : Shape{m, n};
  Tensor<T> y(out_shape);
  for (std::size_t p = 0; p < batch; ++p) {
    simd::gemm<T>(ta, tb, m, n, k, T(1), a.value().data() + p * a_step, lda,
                  b.value().data() + p * b_step, ldb, T(0), y.data() + p * m * n, n);
  }
  return a.graph()->record("matmul", std::move(y), {a, b}, [=](BackwardContext<T>& ctx) {
    const T* g = ctx.out_grad().data();
    const T* av = ctx.in(0).data();
    const T* bv = ctx.in(1).data();
    for (std::size_t p = 0; p < batch; ++p) {
      const T* gp = g + p * m * n;
      const T* ap = av + p * a_step;
      const T* bp = bv + p * b_step;
      if (ctx.needs(0)) {
        T* ga = ctx.in_grad(0).data() + p * a_step;
        if (!ta) {
          simd::gemm<T>(false, !tb, m, k, n, T(1), gp, n, bp, ldb, T(1), ga, lda);
        } else {
          simd::gemm<T>(tb, true, k, m, n, T(1), bp, ldb, gp, n, T(1), ga, lda);
        }
      }
      if (ctx.needs(1)) {
        T* gb = ctx.in_grad(1).data() + p * b_step;
        if (!tb) {
          simd::gemm<T>(!ta, false, k, n, m, T(1), ap, lda, gp, n, T(1), gb, ldb);
        } else {
          simd::gemm<T>(true, ta, n, k, m, T(1), gp, n, ap, lda, T(1), gb, ldb);
        }
      }
    }
  });
}

template <typename T>
Var<T> channel_mix(const Var<T>& x, const Var<T>& w, int axis) {
  const Shape& xs = x.shape();
  const Shape& ws = w.shape();
  const AxisSplit sp = split_at("channel_mix", xs, axis);
  if (ws.size() != 2 || ws[1] != sp.len) {
    throw ShapeError("channel_mix", "weight " + to_string(ws) + " does not match " + std::to_string(sp.len) +
                                        " input channels of " + to_string(xs));
  }
  const std::size_t co = ws[0], ci = ws[1];
  Shape out_shape = xs;
  out_shape[norm_axis("channel_mix", axis, xs.size())] = co;
  Tensor<T> y(out_shape);
  for (std::size_t o = 0; o < sp.outer; ++o) {
    simd::gemm<T>(false, false, co, sp.inner, ci, T(1), w.value().data(), ci,
                  x.value().data() + o * ci * sp.inner, sp.inner, T(0), y.data() + o * co * sp.inner, sp.inner);
  }
  return x.graph()->record("channel_mix", std::move(y), {x, w}, [sp, co, ci](BackwardContext<T>& ctx) {
    const T* g = ctx.out_grad().data();
    const T* xv = ctx.in(0).data();
    const T* wv = ctx.in(1).data();
    for (std::size_t o = 0; o < sp.outer; ++o) {
      const T* go = g + o * co * sp.inner;
      if (ctx.needs(0)) {
        simd::gemm<T>(true, false, ci, sp.inner, co, T(1), wv, ci, go, sp.inner, T(1),
                      ctx.in_grad(0).data() + o * ci * sp.inner, sp.inner);
      }
      if (ctx.needs(1)) {
        simd::gemm<T>(false, true, co, ci, sp.inner, T(1), go, sp.inner, xv + o * ci * sp.inner, sp.inner, T(1),
                      ctx.in_grad(1).data(), ci);
      }
    }
  });
}

template <typename T>
Var<T> conv3d(const Var<T>& x, const Var<T>& w, const Conv3dOptions& opt) {
  const Shape& xs = x.shape();
  const Shape& ws = w.shape();
  if (xs.size() != 5 || ws.size() != 5 || ws[1] != xs[2]) {
    throw ShapeError("conv3d", "input " + to_string(xs) + " incompatible with weight " + to_string(ws));
  }
  const std::size_t nb = xs[0], nt = xs[1], ci = xs[2], nh = xs[3], nw = xs[4];
  const std::size_t co = ws[0], kt = ws[2], kh = ws[3], kw = ws[4];
  const auto [st, sh, sw] = opt.stride;
  const auto [pt, ph, pw] = opt.padding;
  if (st == 0 || sh == 0 || sw == 0 || nt + 2 * pt < kt || nh + 2 * ph < kh || nw + 2 * pw < kw) {
    throw ShapeError("conv3d", "kernel " + to_string(ws) + " does not fit input " + to_string(xs));
  }
  const std::size_t ot = (nt + 2 * pt - kt) / st + 1;
  const std::size_t oh = (nh + 2 * ph - kh) / sh + 1;
  const std::size_t ow = (nw + 2 * pw - kw) / sw + 1;
  const std::size_t kdim = ci * kt * kh * kw;
  const std::size_t pdim = ot * oh * ow;

  // col[b][r][p]: r enumerates (ci, dt, dh, dw), p enumerates (t', h', w').
  // src[r*pdim+p] is the offset into one input sample, or -1 inside the padding.
  auto src = std::make_shared<std::vector<long>>(kdim * pdim, -1L);
  for (std::size_t r = 0; r < kdim; ++r) {
    const std::size_t dw = r % kw, dh = (r / kw) % kh, dt = (r / (kw * kh)) % kt, c = r / (kw * kh * kt);
    for (std::size_t p = 0; p < pdim; ++p) {
      const std::size_t qw = p % ow, qh = (p / ow) % oh, qt = p / (ow * oh);
      const long ti = static_cast<long>(qt * st + dt) - static_cast<long>(pt);
      const long hi = static_cast<long>(qh * sh + dh) - static_cast<long>(ph);
      const long wi = static_cast<long>(qw * sw + dw) - static_cast<long>(pw);
      if (ti < 0 || hi < 0 || wi < 0 || ti >= static_cast<long>(nt) || hi >= static_cast<long>(nh) ||
          wi >= static_cast<long>(nw)) {
        continue;
      }
      (*src)[r * pdim + p] = ((ti * static_cast<long>(ci) + static_cast<long>(c)) * static_cast<long>(nh) + hi) *
                                 static_cast<long>(nw) +
                             wi;
    }
  }
  const std::size_t sample = nt * ci * nh * nw;
  auto col = std::make_shared<std::vector<T>>(nb * kdim * pdim, T(0));
  const T* xv = x.value().data();
  for (std::size_t b = 0; b < nb; ++b) {
    T* cb = col->data() + b * kdim * pdim;
    const T* xb = xv + b * sample;
    for (std::size_t i = 0; i < kdim * pdim; ++i) {
      const long idx = (*src)[i];
      if (idx >= 0) cb[i] = xb[idx];
    }
  }
  Tensor<T> y(Shape{nb, ot, co, oh, ow});
  std::vector<T> tmp(co * pdim);
  for (std::size_t b = 0; b < nb; ++b) {
    simd::gemm<T>(false, false, co, pdim, kdim, T(1), w.value().data(), kdim, col->data() + b * kdim * pdim, pdim,
                  T(0), tmp.data(), pdim);
    for (std::size_t c = 0; c < co; ++c) {
      for (std::size_t q = 0; q < ot; ++q) {
        std::copy_n(tmp.data() + c * pdim + q * oh * ow, oh * ow, y.data() + ((b * ot + q) * co + c) * oh * ow);
      }
    }
  }
  return x.graph()->record("conv3d", std::move(y), {x, w}, [=](BackwardContext<T>& ctx) {
    const T* g = ctx.out_grad().data();
    const T* wv = ctx.in(1).data();
    std::vector<T> gtmp(co * pdim);
    std::vector<T> gcol(kdim * pdim);
    for (std::size_t b = 0; b < nb; ++b) {
      for (std::size_t c = 0; c < co; ++c) {
        for (std::size_t q = 0; q < ot; ++q) {
          std::copy_n(g + ((b * ot + q) * co + c) * oh * ow, oh * ow, gtmp.data() + c * pdim + q * oh * ow);
        }
      }
      if (ctx.needs(1)) {
        simd::gemm<T>(false, true, co, kdim, pdim, T(1), gtmp.data(), pdim, col->data() + b * kdim * pdim, pdim,
                      T(1), ctx.in_grad(1).data(), kdim);
      }
      if (ctx.needs(0)) {
        simd::gemm<T>(true, false, kdim, pdim, co, T(1), wv, kdim, gtmp.data(), pdim, T(0), gcol.data(), pdim);
        T* gx = ctx.in_grad(0).data() + b * sample;
        for (std::size_t i = 0; i < kdim * pdim; ++i) {
          const long idx = (*src)[i];
          if (idx >= 0) gx[idx] += gcol[i];
        }
      }
    }
  });
}

template <typename T>
Var<T> reshape(const Var<T>& a, Shape shape) {
  if (numel(shape) != a.size()) throw ShapeError("reshape", to_string(a.shape()) + " -> " + to_string(shape));
  Tensor<T> y(std::move(shape), a.value().vec());
  return a.graph()->record("reshape", std::move(y), {a}, [](BackwardContext<T>& ctx) {
    const auto g = ctx.out_grad();
    auto gx = ctx.in_grad(0);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

template <typename T>
Var<T> permute(const Var<T>& a, const std::vector<std::size_t>& perm) {
  const Shape& in = a.shape();
  if (perm.size() != in.size()) throw ShapeError("permute", "permutation rank differs from " + to_string(in));
  std::vector<bool> seen(in.size(), false);
  Shape out(in.size());
  const Strides in_st = strides_of(in);
  Strides src(in.size());
  for (std::size_t d = 0; d < perm.size(); ++d) {
    if (perm[d] >= in.size() || seen[perm[d]]) throw ShapeError("permute", "invalid permutation of " + to_string(in));
    seen[perm[d]] = true;
    out[d] = in[perm[d]];
    src[d] = in_st[perm[d]];
  }
  const Strides none(in.size(), 0);
  const T* x = a.value().data();
  Tensor<T> y(out);
  for_each_index(out, src, none, [&](std::size_t o, std::size_t i, std::size_t) { y[o] = x[i]; });
  return a.graph()->record("permute", std::move(y), {a}, [out, src, none](BackwardContext<T>& ctx) {
    const auto g = ctx.out_grad();
    auto gx = ctx.in_grad(0);
    for_each_index(out, src, none, [&](std::size_t o, std::size_t i, std::size_t) { gx[i] += g[o]; });
  });
}

template <typename T>
Var<T> slice(const Var<T>& a, int axis, std::size_t start, std::size_t length) {
  const AxisSplit sp = split_at("slice", a.shape(), axis);
  if (length == 0 || start + length > sp.len) {
    throw ShapeError("slice", "range [" + std::to_string(start) + "," + std::to_string(start + length) +
                                  ") outside " + to_string(a.shape()));
  }
  Shape out = a.shape();
  out[norm_axis("slice", axis, out.size())] = length;
  Tensor<T> y(out);
  const T* x = a.value().data();
  for (std::size_t o = 0; o < sp.outer; ++o) {
    std::copy_n(x + (o * sp.len + start) * sp.inner, length * sp.inner, y.data() + o * length * sp.inner);
  }
  return a.graph()->record("slice", std::move(y), {a}, [sp, start, length](BackwardContext<T>& ctx) {
    const auto g = ctx.out_grad();
    auto gx = ctx.in_grad(0);
    for (std::size_t o = 0; o < sp.outer; ++o) {
      for (std::size_t j = 0; j < length * sp.inner; ++j) {
        gx[(o * sp.len + start) * sp.inner + j] += g[o * length * sp.inner + j];
      }
    }
  });
}

template <typename T>
Var<T> concat(const std::vector<Var<T>>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat", "no operands");
  const Shape& first = parts[0].shape();
  const std::size_t ax = norm_axis("concat", axis, first.size());
  Shape out = first;
  out[ax] = 0;
  std::vector<std::size_t> lens;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d) ok = d == ax || s[d] == first[d];
    if (!ok) throw ShapeError("concat", "operand " + to_string(s) + " incompatible with " + to_string(first));
    out[ax] += s[ax];
    lens.push_back(s[ax]);
  }
  const AxisSplit sp = split_at("concat", out, static_cast<int>(ax));
  Tensor<T> y(out);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const T* x = parts[k].value().data();
    for (std::size_t o = 0; o < sp.outer; ++o) {
      std::copy_n(x + o * lens[k] * sp.inner, lens[k] * sp.inner, y.data() + (o * sp.len + offset) * sp.inner);
    }
    offset += lens[k];
  }
  return parts[0].graph()->record("concat", std::move(y), parts, [sp, lens](BackwardContext<T>& ctx) {
    const auto g = ctx.out_grad();
    std::size_t off = 0;
    for (std::size_t k = 0; k < lens.size(); ++k) {
      if (ctx.needs(k)) {
        auto gx = ctx.in_grad(k);
        for (std::size_t o = 0; o < sp.outer; ++o) {
          for (std::size_t j = 0; j < lens[k] * sp.inner; ++j) {
            gx[o * lens[k] * sp.inner + j] += g[(o * sp.len + off) * sp.inner + j];
          }
        }
      }
      off += lens[k];
    }
  });
}

template <typename T>
Var<T> broadcast_to(const Var<T>& a, const Shape& shape) {
  if (broadcast_shape("broadcast_to", a.shape(), shape) != shape) {
    throw ShapeError("broadcast_to", to_string(a.shape()) + " cannot expand to " + to_string(shape));
  }
  const Strides sa = broadcast_strides(a.shape(), shape);
  const Strides none(shape.size(), 0);
  const T* x = a.value().data();
  Tensor<T> y(shape);
  for_each_index(shape, sa, none, [&](std::size_t o, std::size_t i, std::size_t) { y[o] = x[i]; });
  return a.graph()->record("broadcast_to", std::move(y), {a}, [shape, sa, none](BackwardContext<T>& ctx) {
    const auto g = ctx.out_grad();
    auto gx = ctx.in_grad(0);
    for_each_index(shape, sa, none, [&](std::size_t o, std::size_t i, std::size_t) { gx[i] += g[o]; });
  });
}

#define HDF_INSTANTIATE_OPS(T)                                                      \
  template Var<T> add(const Var<T>&, const Var<T>&);                                \
  template Var<T> sub(const Var<T>&, const Var<T>&);                                \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                \
  template Var<T> div(const Var<T>&, const Var<T>&);                                \
  template Var<T> add_scalar(const Var<T>&, Scalar<T>);                             \
  template Var<T> scale(const Var<T>&, Scalar<T>);                                  \
  template Var<T> neg(const Var<T>&);                                               \
  template Var<T> exp(const Var<T>&);                                               \
  template Var<T> log(const Var<T>&);                                               \
  template Var<T> tanh(const Var<T>&);                                              \
  template Var<T> sigmoid(const Var<T>&);                                           \
  template Var<T> sqrt(const Var<T>&);                                              \
  template Var<T> square(const Var<T>&);                                            \
  template Var<T> abs(const Var<T>&);                                               \
  template Var<T> silu(const Var<T>&);                                              \
  template Var<T> sign(const Var<T>&);                                              \
  template Var<T> detach(const Var<T>&);                                            \
  template Var<T> sum(const Var<T>&, const Axes&, bool);                            \
  template Var<T> mean(const Var<T>&, const Axes&, bool);                           \
  template Var<T> max(const Var<T>&, const Axes&, bool);                            \
  template Var<T> variance(const Var<T>&, const Axes&, bool);                       \
  template Var<T> l2_norm(const Var<T>&, const Axes&, bool);                        \
  template Var<T> sum_all(const Var<T>&);                                           \
  template Var<T> mean_all(const Var<T>&);                                          \
  template Var<T> softmax(const Var<T>&, int);                                      \
  template Var<T> log_softmax(const Var<T>&, int);                                  \
  template Var<T> matmul(const Var<T>&, const Var<T>&, bool, bool);                 \
  template Var<T> channel_mix(const Var<T>&, const Var<T>&, int);                   \
  template Var<T> conv3d(const Var<T>&, const Var<T>&, const Conv3dOptions&);       \
  template Var<T> reshape(const Var<T>&, Shape);                                    \
  template Var<T> permute(const Var<T>&, const std::vector<std::size_t>&);          \
  template Var<T> slice(const Var<T>&, int, std::size_t, std::size_t);              \
  template Var<T> concat(const std::vector<Var<T>>&, int);                          \
  template Var<T> broadcast_to(const Var<T>&, const Shape&);

HDF_INSTANTIATE_OPS(float)
HDF_INSTANTIATE_OPS(double)

}  // namespace hdf::ad
