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

#ifndef RANKFORGE_ADAM_H_
#define RANKFORGE_ADAM_H_

#include <cstdint>

#include "rankforge/network.h"

namespace rankforge {

struct AdamState {
  std::uint64_t step = 0;
  ParamSet first_moment;
  ParamSet second_moment;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_network(const Network& net);
};

// One Adam update with coupled L2: the gradient becomes g + l2 * theta
// before the moment updates. Throws InputError for lr <= 0 or l2 < 0 and
// UsageError on a shape mismatch between grads, state and parameters.
void adam_step(Network& net, const ParamSet& grads, AdamState& state,
               double lr, double l2);

}  // namespace rankforge

#endif  // RANKFORGE_ADAM_H_
