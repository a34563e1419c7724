#include "styleforge/autodiff/adam.hpp"

#include <cmath>

#include "styleforge/error.hpp"

namespace styleforge::ad {

AdamState::AdamState(const Shape& shape, AdamOptions opts)
    : options(opts), first_moment(shape, 0.0), second_moment(shape, 0.0) {}

void adam_step(Tensor& params, const Tensor& grads, AdamState& state) {
  if (params.shape() != grads.shape() || params.shape() != state.first_moment.shape()) {
    throw ShapeError("adam_step: params " + shape_string(params.shape()) + ", grads " +
                     shape_string(grads.shape()) + ", state " + shape_string(state.first_moment.shape()) +
                     " must agree");
  }
  const AdamOptions& o = state.options;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(o.beta1, t);
  const double correction2 = 1.0 - std::pow(o.beta2, t);
  auto m = state.first_moment.data();
  auto v = state.second_moment.data();
  auto p = params.data();
  const auto g = grads.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g[i];
    v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g[i] * g[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    p[i] -= o.learning_rate * m_hat / (std::sqrt(v_hat) + o.epsilon);
  }
}

}  // namespace styleforge::ad
