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

#include "ldalfm/adam.hpp"

#include <cmath>

namespace ldalfm {

void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state) {
  if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v)) {
    throw std::invalid_argument("adam_step: shape mismatch between parameters, gradient and state");
  }
  grads.check_finite("adam_step gradient");

  const auto& cfg = state.config;
  ++state.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));

  auto theta = blocks(params);
  const auto g = blocks(grads);
  auto m = blocks(state.m);
  auto v = blocks(state.v);
  for (std::size_t b = 0; b < theta.size(); ++b) {
    for (std::size_t n = 0; n < theta[b].values.size(); ++n) {
      const double gn = g[b].values[n];
      double& mn = m[b].values[n];
      double& vn = v[b].values[n];
      mn = cfg.beta1 * mn + (1.0 - cfg.beta1) * gn;
      vn = cfg.beta2 * vn + (1.0 - cfg.beta2) * gn * gn;
      theta[b].values[n] -= cfg.lr * (mn / c1) / (std::sqrt(vn / c2) + cfg.eps);
    }
  }
  params.check_finite("adam_step update");
}

}  // namespace ldalfm
