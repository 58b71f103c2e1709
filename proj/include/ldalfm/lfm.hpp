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

#include <span>
#include <vector>

#include "ldalfm/model_config.hpp"
#include "ldalfm/params.hpp"

namespace ldalfm {

/// alpha + b_i + b_u + <q_i, p_u> over all K + K* factors. Not clipped.
double predict_rating(const ParamSet& params, int user, int item);

/// Predictions for a batch; clip limits them to [1, 5] when set.
std::vector<double> predict_ratings(const ParamSet& params, std::span<const Rating> ratings,
                                    bool clip = false);

/// Sum of squared rating errors.
double squared_error_sum(const ParamSet& params, std::span<const Rating> ratings);

/// grad += scale * d/dparams sum (r - r_hat)^2. Shared by every rating model
/// so equal inputs give bit-equal gradients.
void accumulate_squared_error_gradient(const ParamSet& params, std::span<const Rating> ratings,
                                       double scale, ParamSet& grad);

struct RatingLossOptions {
  bool normalize_by_count = true;  // divide the error sum by |T|
  bool regularize_q = true;        // include ||Q||^2 in the penalty
  bool freeze_q = false;           // zero the Q gradient (LDAFirst)
};

/// (1/|T|) sum (r - r_hat)^2 + lambda (||Q||^2 + ||P||^2 + ||b_item||^2 + ||b_user||^2),
/// with the normalisation and the Q term switchable through options.
double lfm_objective(const ParamSet& params, std::span<const Rating> train, double lambda,
                     const RatingLossOptions& options = {});

ParamSet lfm_gradient(const ParamSet& params, std::span<const Rating> train, double lambda,
                      const RatingLossOptions& options = {});

struct FitResult {
  ParamSet params;
  FitTrace trace;
};

/// Full-batch Adam on lfm_objective from init_params(seed); returns the
/// last iterate.
FitResult fit_lfm(const HybridConfig& config, const TrainingData& data,
                  const RatingLossOptions& options = {}, const IterationObserver& observer = {});

/// The same loop from caller-supplied starting parameters.
FitResult train_rating_model(ParamSet start, const HybridConfig& config, const TrainingData& data,
                             const RatingLossOptions& options,
                             const IterationObserver& observer = {});

/// Global mean and per-user / per-item mean deviations from it.
struct RatingStats {
  double alpha = 0.0;
  Vector r_bar_user;
  Vector r_bar_item;
};

/// Users or items without train ratings get a zero deviation.
RatingStats compute_rating_stats(std::span<const Rating> train, int n_users, int n_items);

inline double offset_predict(const RatingStats& stats) { return stats.alpha; }

/// alpha + r_bar_u + r_bar_i.
double baseline_predict(const RatingStats& stats, int user, int item);

}  // namespace ldalfm
