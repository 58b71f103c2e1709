/*
   Copyright 2026 The ldalfm Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include "ldalfm/params.hpp"

namespace ldalfm {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment accumulators shaped like the parameters they track.
struct AdamState {
  ParamSet m;
  ParamSet v;
  long t = 0;
  AdamConfig config;

  AdamState() = default;
  AdamState(const ParamSet& like, AdamConfig cfg) : m(like.zeros_like()), v(like.zeros_like()), config(cfg) {}
};

/// One bias-corrected Adam update applied elementwise to every block,
/// alpha and kappa included. Throws NonFiniteError naming the block if a
/// gradient, or the updated parameters, are not finite.
void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state);

}  // namespace ldalfm
