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

#include <functional>

#include "ldalfm/params.hpp"

namespace ldalfm {

using Objective = std::function<double(const ParamSet&)>;

/// Central-difference gradient, one coordinate at a time. Meant as a test
/// oracle on small instances: costs 2 * params.size() objective calls.
ParamSet finite_diff_gradient(const Objective& objective, const ParamSet& params, double h = 1e-5);

/// Same rule for a plain vector argument.
Vector finite_diff_gradient(const std::function<double(const Vector&)>& objective,
                            const Vector& x, double h = 1e-5);

}  // namespace ldalfm
