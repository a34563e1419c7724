#pragma once

#include <cstdint>

#include "styleforge/autodiff/tensor.hpp"

namespace styleforge::ad {

struct AdamOptions {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment accumulators for one parameter tensor.
struct AdamState {
  AdamState() = default;
  AdamState(const Shape& shape, AdamOptions opts);

  AdamOptions options;
  std::uint64_t step = 0;
  Tensor first_moment;
  Tensor second_moment;
};

/// One bias-corrected Adam update of params in place; increments state.step.
void adam_step(Tensor& params, const Tensor& grads, AdamState& state);

}  // namespace styleforge::ad
