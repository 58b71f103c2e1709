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

#include "ldalfm/lfm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ldalfm/adam.hpp"
#include "ldalfm/metrics.hpp"
#include "ldalfm/rng.hpp"
#include "penalty.hpp"

namespace ldalfm {

namespace {

void check_ids(const ParamSet& params, int user, int item) {
  if (user < 0 || user >= params.n_users() || item < 0 || item >= params.n_items()) {
    throw std::out_of_range("invalid (user, item) = (" + std::to_string(user) + ", " +
                            std::to_string(item) + ")");
  }
}

double validation_mse(const ParamSet& params, std::span<const Rating> validation) {
  if (validation.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> truth;
  truth.reserve(validation.size());
  for (const auto& r : validation) truth.push_back(r.value);
  return mse(predict_ratings(params, validation), truth);
}

}  // namespace

double predict_rating(const ParamSet& params, int user, int item) {
  check_ids(params, user, item);
  return params.alpha + params.b_item[item] + params.b_user[user] +
         params.Q.row(item).dot(params.P.row(user));
}

std::vector<double> predict_ratings(const ParamSet& params, std::span<const Rating> ratings,
                                    bool clip) {
  std::vector<double> out;
  out.reserve(ratings.size());
  for (const auto& r : ratings) {
    const double p = predict_rating(params, r.user, r.item);
    out.push_back(clip ? std::clamp(p, 1.0, 5.0) : p);
  }
  return out;
}

double squared_error_sum(const ParamSet& params, std::span<const Rating> ratings) {
  double sum = 0.0;
  for (const auto& r : ratings) {
    const double e = r.value - predict_rating(params, r.user, r.item);
    sum += e * e;
  }
  return sum;
}

void accumulate_squared_error_gradient(const ParamSet& params, std::span<const Rating> ratings,
                                       double scale, ParamSet& grad) {
  for (const auto& r : ratings) {
    const double e = r.value - predict_rating(params, r.user, r.item);
    const double coef = -2.0 * scale * e;
    grad.alpha += coef;
    grad.b_user[r.user] += coef;
    grad.b_item[r.item] += coef;
    grad.P.row(r.user) += coef * params.Q.row(r.item);
    grad.Q.row(r.item) += coef * params.P.row(r.user);
  }
}

double lfm_objective(const ParamSet& params, std::span<const Rating> train, double lambda,
                     const RatingLossOptions& options) {
  if (train.empty()) throw std::invalid_argument("lfm_objective: empty training set");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lfm_objective: lambda must be >= 0");
  const double scale = options.normalize_by_count ? 1.0 / static_cast<double>(train.size()) : 1.0;
  double value = scale * squared_error_sum(params, train);
  if (options.regularize_q) value += detail::l2_penalty(params.Q, lambda);
  value += detail::l2_penalty(params.P, lambda);
  value += detail::l2_penalty(params.b_item, lambda);
  value += detail::l2_penalty(params.b_user, lambda);
  return value;
}

ParamSet lfm_gradient(const ParamSet& params, std::span<const Rating> train, double lambda,
                      const RatingLossOptions& options) {
  if (train.empty()) throw std::invalid_argument("lfm_gradient: empty training set");
  const double scale = options.normalize_by_count ? 1.0 / static_cast<double>(train.size()) : 1.0;
  ParamSet grad = params.zeros_like();
  accumulate_squared_error_gradient(params, train, scale, grad);
  if (options.regularize_q) grad.Q += (2.0 * lambda) * params.Q;
  grad.P += (2.0 * lambda) * params.P;
  grad.b_item += (2.0 * lambda) * params.b_item;
  grad.b_user += (2.0 * lambda) * params.b_user;
  if (options.freeze_q) grad.Q.setZero();
  return grad;
}

FitResult train_rating_model(ParamSet start, const HybridConfig& config, const TrainingData& data,
                             const RatingLossOptions& options, const IterationObserver& observer) {
  config.validate();
  FitResult result{std::move(start), {}};
  AdamState adam(result.params, AdamConfig{.lr = config.lr});
  for (int it = 1; it <= config.n_iter; ++it) {
    try {
      for (int step = 0; step < config.inner_steps; ++step) {
        adam_step(result.params, lfm_gradient(result.params, data.train, config.lambda, options), adam);
      }
    } catch (const NonFiniteError& e) {
      throw DivergenceError(it, "iteration " + std::to_string(it) + ": " + e.what());
    }
    const double objective = lfm_objective(result.params, data.train, config.lambda, options);
    if (!std::isfinite(objective)) {
      throw DivergenceError(it, "iteration " + std::to_string(it) + ": non-finite objective");
    }
    result.trace.push_back({it, objective, validation_mse(result.params, data.validation)});
    if (observer) observer(it, result.params);
  }
  return result;
}

FitResult fit_lfm(const HybridConfig& config, const TrainingData& data,
                  const RatingLossOptions& options, const IterationObserver& observer) {
  config.validate();
  const ModelDims dims{data.n_users, data.n_items, config.K, config.K_star, 1};
  ParamSet start = init_params(data.train, dims, derive_seed(config.seed, "init"),
                               config.init_sigma, config.kappa0);
  return train_rating_model(std::move(start), config, data, options, observer);
}

RatingStats compute_rating_stats(std::span<const Rating> train, int n_users, int n_items) {
  if (train.empty()) throw std::invalid_argument("compute_rating_stats: empty training set");
  RatingStats stats;
  double total = 0.0;
  for (const auto& r : train) total += r.value;
  stats.alpha = total / static_cast<double>(train.size());

  Vector user_sum = Vector::Zero(n_users), item_sum = Vector::Zero(n_items);
  Vector user_n = Vector::Zero(n_users), item_n = Vector::Zero(n_items);
  for (const auto& r : train) {
    user_sum[r.user] += r.value - stats.alpha;
    item_sum[r.item] += r.value - stats.alpha;
    user_n[r.user] += 1.0;
    item_n[r.item] += 1.0;
  }
  stats.r_bar_user = (user_n.array() > 0).select(user_sum.array() / user_n.array().max(1.0), 0.0);
  stats.r_bar_item = (item_n.array() > 0).select(item_sum.array() / item_n.array().max(1.0), 0.0);
  return stats;
}

double baseline_predict(const RatingStats& stats, int user, int item) {
  if (user < 0 || user >= stats.r_bar_user.size() || item < 0 || item >= stats.r_bar_item.size()) {
    throw std::out_of_range("baseline_predict: invalid (user, item) = (" + std::to_string(user) +
                            ", " + std::to_string(item) + ")");
  }
  return stats.alpha + stats.r_bar_user[user] + stats.r_bar_item[item];
}

}  // namespace ldalfm
