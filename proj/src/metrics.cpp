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

#include "ldalfm/metrics.hpp"

#include <stdexcept>

namespace ldalfm {

double mse(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size()) {
    throw std::invalid_argument("mse: prediction and truth lengths differ");
  }
  if (predictions.empty()) throw std::invalid_argument("mse: empty input");
  double sum = 0.0;
  for (std::size_t n = 0; n < predictions.size(); ++n) {
    const double d = predictions[n] - truths[n];
    sum += d * d;
  }
  return sum / static_cast<double>(predictions.size());
}

}  // namespace ldalfm
