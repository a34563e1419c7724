#include "styleforge/autodiff/tape.hpp"

#include <algorithm>

#include "styleforge/error.hpp"

namespace styleforge::ad {

Var Tape::variable(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, true, false, {}});
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, false, false, {}});
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id >= nodes_.size()) throw InvalidArgument("variable does not belong to this tape");
  return nodes_[v.id];
}

Tape::Node& Tape::node(Var v) {
  if (v.id >= nodes_.size()) throw InvalidArgument("variable does not belong to this tape");
  return nodes_[v.id];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
  const bool needs = std::any_of(inputs.begin(), inputs.end(), [&](Var v) { return node(v).requires_grad; });
  nodes_.push_back(Node{std::move(value), {}, needs, false, needs ? std::move(fn) : BackwardFn{}});
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, BackwardFn fn) {
  const bool needs = std::any_of(inputs.begin(), inputs.end(), [&](Var v) { return node(v).requires_grad; });
  nodes_.push_back(Node{std::move(value), {}, needs, false, needs ? std::move(fn) : BackwardFn{}});
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor& Tape::grad_buffer(Var v) {
  Node& n = node(v);
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape(), 0.0);
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::backward(Var loss) {
  const Node& root = node(loss);
  if (root.value.size() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " + shape_string(root.value.shape()));
  }
  for (auto& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  if (!root.requires_grad) return;
  grad_buffer(loss)[0] = 1.0;
  for (std::uint32_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    // The closure may grow other nodes' gradients but never this one.
    n.backward(*this, n.grad);
  }
}

Tensor Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.has_grad) return n.grad;
  return Tensor(n.value.shape(), 0.0);
}

}  // namespace styleforge::ad
