#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <vector>

#include "styleforge/autodiff/tensor.hpp"

namespace styleforge::ad {

/// Handle to a node on a Tape. Only meaningful for the tape that issued it.
struct Var {
  std::uint32_t id = UINT32_MAX;
};

/// Wengert list for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, which is already a topological
/// order, so backward() is a single reverse sweep. A tape belongs to one
/// computation; build a fresh tape per forward pass.
class Tape {
 public:
  /// Called during the reverse sweep with the node's accumulated gradient.
  /// Implementations add into their inputs through grad_buffer().
  using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

  /// Leaf that receives a gradient.
  Var variable(Tensor value);
  /// Leaf that never receives a gradient.
  Var constant(Tensor value);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  /// Clears previous gradients, seeds d(loss)/d(loss) = 1 and propagates.
  /// Throws ShapeError unless loss holds exactly one element.
  void backward(Var loss);

  /// Gradient of the last backward() loss w.r.t. v; zeros if v did not
  /// participate.
  Tensor grad(Var v) const;

  /// Appends an op result. The node requires grad iff any input does; the
  /// backward function is dropped otherwise.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);
  Var record(Tensor value, const std::vector<Var>& inputs, BackwardFn fn);

  /// Gradient accumulator for v, allocated as zeros on first use.
  Tensor& grad_buffer(Var v);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
  };

  const Node& node(Var v) const;
  Node& node(Var v);

  std::vector<Node> nodes_;
};

}  // namespace styleforge::ad
