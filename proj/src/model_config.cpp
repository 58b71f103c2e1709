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

#include "ldalfm/model_config.hpp"

#include <fstream>

#include <fmt/format.h>

namespace ldalfm {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::offset: return "offset";
    case ModelKind::baseline: return "baseline";
    case ModelKind::lfm: return "lfm";
    case ModelKind::ldafirst: return "ldafirst";
    case ModelKind::lda_lfm: return "lda_lfm";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  for (ModelKind kind : kAllModels) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown model '" + std::string(name) +
                              "' (expected offset, baseline, lfm, ldafirst or lda_lfm)");
}

void HybridConfig::validate() const {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (K_star < 0) throw std::invalid_argument("K_star must be >= 0");
  if (n_iter < 1) throw std::invalid_argument("n_iter must be >= 1");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be >= 0");
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be > 0");
  if (!(init_sigma >= 0.0)) throw std::invalid_argument("init_sigma must be >= 0");
  if (!(gamma > 0.0) || !(nu > 0.0)) throw std::invalid_argument("gamma and nu must be > 0");
  if (inner_steps < 1) throw std::invalid_argument("inner_steps must be >= 1");
  if (gibbs_sweeps < 0) throw std::invalid_argument("gibbs_sweeps must be >= 0");
}

void write_trace_csv(const FitTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "iteration,train_objective,val_mse\n";
  for (const auto& row : trace) {
    out << fmt::format("{},{:.17g},{:.17g}\n", row.iteration, row.train_objective, row.val_mse);
  }
}

}  // namespace ldalfm
