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

#include "hdf/diffcore/graph.hpp"

#include <string>

namespace hdf::ad {

template <typename T>
const Tensor<T>& Var<T>::value() const {
  if (g_ == nullptr) throw GraphError("value of an unbound Var");
  return g_->value_of(id_);
}

template <typename T>
bool Var<T>::requires_grad() const {
  return g_ != nullptr && g_->requires_grad_of(id_);
}

template <typename T>
std::span<const T> BackwardContext<T>::out_grad() const {
  return g_.nodes_[self_].grad;
}

template <typename T>
const Tensor<T>& BackwardContext<T>::out() const {
  return g_.nodes_[self_].value;
}

template <typename T>
const Tensor<T>& BackwardContext<T>::in(std::size_t i) const {
  return g_.nodes_[g_.nodes_[self_].parents.at(i)].value;
}

template <typename T>
bool BackwardContext<T>::needs(std::size_t i) const {
  return g_.nodes_[g_.nodes_[self_].parents.at(i)].requires_grad;
}

template <typename T>
std::span<T> BackwardContext<T>::in_grad(std::size_t i) {
  auto& parent = g_.nodes_[g_.nodes_[self_].parents.at(i)];
  if (parent.grad.empty()) parent.grad.assign(parent.value.size(), T(0));
  return parent.grad;
}

template <typename T>
Var<T> Graph<T>::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var<T>(this, nodes_.size() - 1);
}

template <typename T>
void Graph<T>::check_owner(const Var<T>& v, std::string_view op) const {
  if (v.graph() != this || v.id() >= nodes_.size()) {
    throw GraphError(std::string(op) + ": operand belongs to another graph");
  }
}

template <typename T>
Var<T> Graph<T>::constant(Tensor<T> value) {
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  return push(std::move(n));
}

template <typename T>
Var<T> Graph<T>::input(Tensor<T> value, bool requires_grad) {
  Node n;
  n.op = "input";
  n.value = std::move(value);
  n.requires_grad = requires_grad && grad_enabled_;
  return push(std::move(n));
}

template <typename T>
Var<T> Graph<T>::parameter(Parameter<T>& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var<T>(this, it->second);
  Node n;
  n.op = "parameter";
  n.value = p.value;
  n.param = &p;
  n.requires_grad = grad_enabled_;
  Var<T> v = push(std::move(n));
  param_nodes_.emplace(&p, v.id());
  return v;
}

template <typename T>
Var<T> Graph<T>::record(std::string_view op, Tensor<T> value, const std::vector<Var<T>>& parents,
                        BackwardFn backward) {
  Node n;
  n.op = op;
  n.value = std::move(value);
  n.parents.reserve(parents.size());
  for (const auto& p : parents) {
    check_owner(p, op);
    n.parents.push_back(p.id());
    n.requires_grad = n.requires_grad || nodes_[p.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

template <typename T>
void Graph<T>::backward(const Var<T>& output) {
  check_owner(output, "backward");
  if (backward_done_) throw GraphError("backward called twice without reset");
  Node& out = nodes_[output.id()];
  if (out.value.size() != 1) {
    throw GraphError("backward requires a scalar output, got " + to_string(out.value.shape()));
  }
  backward_done_ = true;
  if (!out.requires_grad) return;
  out.grad.assign(1, T(1));
  for (std::size_t i = output.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) {
      BackwardContext<T> ctx(*this, i);
      n.backward(ctx);
    }
    if (n.param != nullptr) {
      auto& acc = n.param->grad.vec();
      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += n.grad[k];
    }
  }
}

template <typename T>
Tensor<T> Graph<T>::grad(const Var<T>& v) const {
  check_owner(v, "grad");
  const Node& n = nodes_[v.id()];
  if (n.grad.empty()) return Tensor<T>(n.value.shape(), T(0));
  return Tensor<T>(n.value.shape(), n.grad);
}

template <typename T>
void Graph<T>::reset() {
  nodes_.clear();
  param_nodes_.clear();
  backward_done_ = false;
}

template class Var<float>;
template class Var<double>;
template class BackwardContext<float>;
template class BackwardContext<double>;
template class Graph<float>;
template class Graph<double>;

}  // namespace hdf::ad
