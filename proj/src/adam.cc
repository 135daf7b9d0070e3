/*
 * Copyright 2026 The rankforge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rankforge/adam.h"

#include <cmath>

#include "rankforge/errors.h"

namespace rankforge {

AdamState AdamState::for_network(const Network& net) {
  AdamState state;
  state.first_moment = zeros_like(net.params());
  state.second_moment = zeros_like(net.params());
  return state;
}

void adam_step(Network& net, const ParamSet& grads, AdamState& state,
               double lr, double l2) {
  if (!(lr > 0.0)) throw InputError("adam_step: lr must be > 0");
  if (!(l2 >= 0.0)) throw InputError("adam_step: l2 must be >= 0");
  if (!same_shape(net.params(), grads) ||
      !same_shape(net.params(), state.first_moment) ||
      !same_shape(net.params(), state.second_moment)) {
    throw UsageError("adam_step: gradient/state shapes do not match network");
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);

  auto params = tensors(net.params());
  const auto g = tensors(grads);
  auto m = tensors(state.first_moment);
  auto v = tensors(state.second_moment);
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (std::size_t i = 0; i < params[k].size(); ++i) {
      const double grad = g[k][i] + l2 * params[k][i];
      m[k][i] = state.beta1 * m[k][i] + (1.0 - state.beta1) * grad;
      v[k][i] = state.beta2 * v[k][i] + (1.0 - state.beta2) * grad * grad;
      const double m_hat = m[k][i] / correction1;
      const double v_hat = v[k][i] / correction2;
      params[k][i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
  net.bump_generation();
}

}  // namespace rankforge
