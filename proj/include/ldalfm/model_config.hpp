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

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ldalfm/ingest.hpp"
#include "ldalfm/params.hpp"

namespace ldalfm {

enum class ModelKind { offset, baseline, lfm, ldafirst, lda_lfm };

inline constexpr ModelKind kAllModels[] = {ModelKind::offset, ModelKind::baseline, ModelKind::lfm,
                                           ModelKind::ldafirst, ModelKind::lda_lfm};

std::string to_string(ModelKind kind);
/// Throws std::invalid_argument on unknown names.
ModelKind parse_model_kind(std::string_view name);

/// Hyperparameters shared by every fitted model. Defaults follow the
/// published protocol: K = 5, 35 iterations, Adam at lr 0.01, kappa0 = 1,
/// gamma = nu = 0.1.
struct HybridConfig {
  int K = 5;
  int K_star = 0;
  double lambda = 0.01;
  double mu = 100.0;
  int n_iter = 35;
  std::uint64_t seed = 42;
  double lr = 0.01;
  double init_sigma = 0.1;
  double kappa0 = 1.0;
  int inner_steps = 1;
  double gamma = 0.1;
  double nu = 0.1;
  int gibbs_sweeps = 200;
  double divergence_limit = 1e12;

  /// Throws std::invalid_argument on K < 1, K* < 0, n_iter < 1, negative
  /// lambda/mu, non-positive lr/gamma/nu, or inner_steps < 1.
  void validate() const;
};

/// Dense ratings plus the id-space sizes they live in.
struct TrainingData {
  int n_users = 0;
  int n_items = 0;
  std::span<const Rating> train;
  std::span<const Rating> validation;
};

struct TraceRow {
  int iteration = 0;
  double train_objective = 0.0;
  double val_mse = 0.0;
};

using FitTrace = std::vector<TraceRow>;

/// Called after every outer iteration with the current parameters.
using IterationObserver = std::function<void(int iteration, const ParamSet& params)>;

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int iteration, const std::string& what)
      : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// CSV with header "iteration,train_objective,val_mse".
void write_trace_csv(const FitTrace& trace, const std::string& path);

}  // namespace ldalfm
