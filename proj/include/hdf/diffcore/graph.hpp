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

#include <functional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hdf/diffcore/tensor.hpp"

namespace hdf::ad {

template <typename T>
class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while its graph lives
/// and has not been reset.
template <typename T>
class Var {
 public:
  Var() = default;

  Graph<T>* graph() const { return g_; }
  std::size_t id() const { return id_; }
  bool valid() const { return g_ != nullptr; }

  const Tensor<T>& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
  bool requires_grad() const;
  T item() const { return value().item(); }

 private:
  friend class Graph<T>;
  Var(Graph<T>* g, std::size_t id) : g_(g), id_(id) {}

  Graph<T>* g_ = nullptr;
  std::size_t id_ = 0;
};

/// What a node's backward function sees: its own value and incoming
/// gradient, and its parents' values and gradient accumulators.
template <typename T>
class BackwardContext {
 public:
  BackwardContext(Graph<T>& g, std::size_t self) : g_(g), self_(self) {}

  std::span<const T> out_grad() const;
  const Tensor<T>& out() const;
  const Tensor<T>& in(std::size_t i) const;
  bool needs(std::size_t i) const;
  /// Accumulator for parent i, zero-initialized on first access.
  std::span<T> in_grad(std::size_t i);

 private:
  Graph<T>& g_;
  std::size_t self_;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so reverse
/// creation order is a valid topological order for backward.
///
/// Single owner: one thread builds and differentiates a given graph.
template <typename T>
class Graph {
 public:
  using BackwardFn = std::function<void(BackwardContext<T>&)>;

  /// grad_enabled = false records values only (evaluation mode).
  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var<T> constant(Tensor<T> value);
  /// A leaf whose gradient can be read back after backward().
  Var<T> input(Tensor<T> value, bool requires_grad = true);
  /// Leaf bound to a parameter; backward() accumulates into p.grad. Binding
  /// the same parameter twice returns the same node.
  Var<T> parameter(Parameter<T>& p);

  /// Appends an operator node whose value has already been computed.
  /// `backward` runs only when some parent requires a gradient.
  Var<T> record(std::string_view op, Tensor<T> value, const std::vector<Var<T>>& parents,
                BackwardFn backward);

  /// Seeds d(output)/d(output) = 1 and propagates to every node. Throws
  /// GraphError if output is not a single element or backward already ran.
  void backward(const Var<T>& output);

  /// Gradient of the last backward() output with respect to v, or an
  /// all-zero tensor when nothing flowed into v.
  Tensor<T> grad(const Var<T>& v) const;

  void reset();
  std::size_t node_count() const { return nodes_.size(); }
  bool grad_enabled() const { return grad_enabled_; }
  bool backward_done() const { return backward_done_; }

  const Tensor<T>& value_of(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad_of(std::size_t id) const { return nodes_[id].requires_grad; }

 private:
  friend class BackwardContext<T>;

  struct Node {
    std::string_view op;
    Tensor<T> value;
    std::vector<T> grad;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    Parameter<T>* param = nullptr;
    bool requires_grad = false;
  };

  Var<T> push(Node node);
  void check_owner(const Var<T>& v, std::string_view op) const;

  std::vector<Node> nodes_;
  std::unordered_map<Parameter<T>*, std::size_t> param_nodes_;
  bool grad_enabled_;
  bool backward_done_ = false;
};

}  // namespace hdf::ad
