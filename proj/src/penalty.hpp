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

#include <Eigen/Dense>

namespace ldalfm::detail {

// lambda * ||block||^2. Its gradient, 2 lambda block, is written inline as
// grad += (2.0 * lambda) * block at every call site.
template <typename Derived>
double l2_penalty(const Eigen::MatrixBase<Derived>& block, double lambda) {
  return lambda * block.squaredNorm();
}

}  // namespace ldalfm::detail
