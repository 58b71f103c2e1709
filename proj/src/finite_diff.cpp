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

#include "ldalfm/finite_diff.hpp"

#include <cmath>
#include <string>

namespace ldalfm {

namespace {

double checked(double value, const char* where) {
  if (!std::isfinite(value)) {
    throw NonFiniteError("objective", std::string("finite_diff_gradient: non-finite objective ") + where);
  }
  return value;
}

}  // namespace

ParamSet finite_diff_gradient(const Objective& objective, const ParamSet& params, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: h must be positive");
  checked(objective(params), "at the base point");
  ParamSet probe = params;
  ParamSet grad = params.zeros_like();
  auto probe_blocks = blocks(probe);
  auto grad_blocks = blocks(grad);
  for (std::size_t b = 0; b < probe_blocks.size(); ++b) {
    auto values = probe_blocks[b].values;
    for (std::size_t n = 0; n < values.size(); ++n) {
      const double saved = values[n];
      values[n] = saved + h;
      const double up = checked(objective(probe), "at +h");
      values[n] = saved - h;
      const double down = checked(objective(probe), "at -h");
      values[n] = saved;
      grad_blocks[b].values[n] = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

Vector finite_diff_gradient(const std::function<double(const Vector&)>& objective, const Vector& x,
                            double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: h must be positive");
  checked(objective(x), "at the base point");
  Vector probe = x;
  Vector grad(x.size());
  for (Eigen::Index n = 0; n < x.size(); ++n) {
    probe[n] = x[n] + h;
    const double up = checked(objective(probe), "at +h");
    probe[n] = x[n] - h;
    const double down = checked(objective(probe), "at -h");
    probe[n] = x[n];
    grad[n] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace ldalfm
