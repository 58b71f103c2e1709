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

#include <doctest.h>

#include <cmath>

#include "ldalfm/finite_diff.hpp"
#include "ldalfm/lfm.hpp"
#include "synthetic.hpp"

using namespace ldalfm;

namespace {

// Two users, two items, two factors; every quantity chosen for hand arithmetic.
ParamSet hand_params() {
  ParamSet p(2, 2, 1, 1, 1);
  p.alpha = 3.0;
  p.b_user << 0.5, -0.5;
  p.b_item << 0.2, 0.1;
  p.P << 1.0, 0.0, 0.0, 2.0;
  p.Q << 0.5, 1.0, 1.0, -1.0;
  return p;
}

const std::vector<Rating> kHandRatings{{0, 0, 4.0}, {1, 1, 1.0}, {0, 1, 5.0}};

void check_close(const ParamSet& a, const ParamSet& b, double tol) {
  const auto x = blocks(a);
  const auto y = blocks(b);
  for (std::size_t k = 0; k < x.size(); ++k) {
    for (std::size_t n = 0; n < x[k].values.size(); ++n) {
      const double scale = std::max(1.0, std::abs(y[k].values[n]));
      INFO(x[k].name, "[", n, "]");
      CHECK(std::abs(x[k].values[n] - y[k].values[n]) <= tol * scale);
    }
  }
}

}  // namespace

TEST_SUITE("lfm") {

TEST_CASE("prediction sums offset, biases and the factor dot product") {
  const auto p = hand_params();
  CHECK(predict_rating(p, 0, 0) == doctest::Approx(4.2));
  CHECK(predict_rating(p, 1, 1) == doctest::Approx(0.6));
  CHECK(predict_rating(p, 0, 1) == doctest::Approx(4.6));
  CHECK_THROWS_AS(predict_rating(p, 2, 0), std::out_of_range);
  CHECK_THROWS_AS(predict_rating(p, 0, -1), std::out_of_range);

  const auto raw = predict_ratings(p, kHandRatings);
  CHECK(raw[1] == doctest::Approx(0.6));
  const auto clipped = predict_ratings(p, kHandRatings, true);
  CHECK(clipped[1] == 1.0);
  CHECK(clipped[0] == doctest::Approx(4.2));
}

TEST_CASE("objective by hand") {
  const auto p = hand_params();
  CHECK(squared_error_sum(p, kHandRatings) == doctest::Approx(0.36));
  CHECK(lfm_objective(p, kHandRatings, 0.1) == doctest::Approx(1.0));
  CHECK(lfm_objective(p, kHandRatings, 0.1, {.regularize_q = false}) == doctest::Approx(0.675));
  CHECK(lfm_objective(p, kHandRatings, 0.1, {.normalize_by_count = false, .regularize_q = false}) ==
        doctest::Approx(0.915));
  CHECK_THROWS(lfm_objective(p, {}, 0.1));
  CHECK_THROWS(lfm_objective(p, kHandRatings, -1.0));
}

TEST_CASE("analytic gradient matches central differences") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto problem = testing::make_small_problem(4, 3, 2, static_cast<int>(seed % 2) * 2, 3, seed);
    for (const RatingLossOptions options : {RatingLossOptions{}, RatingLossOptions{false, false, false}}) {
      const double lambda = 0.3;
      const auto analytic = lfm_gradient(problem.params, problem.ratings, lambda, options);
      const auto numeric = finite_diff_gradient(
          [&](const ParamSet& q) { return lfm_objective(q, problem.ratings, lambda, options); },
          problem.params);
      check_close(analytic, numeric, 1e-6);
      CHECK(analytic.kappa == 0.0);
      CHECK(analytic.psi.isZero());
    }
  }
}

TEST_CASE("frozen item factors get no gradient") {
  const auto problem = testing::make_small_problem(3, 3, 2, 0, 2, 9);
  const auto grad = lfm_gradient(problem.params, problem.ratings, 0.1, {.freeze_q = true});
  CHECK(grad.Q.isZero());
  CHECK_FALSE(grad.P.isZero());
}

TEST_CASE("fitting lowers the objective and records a trace") {
  const auto planted = testing::make_planted({.n_users = 20, .n_items = 15, .n_ratings = 200, .seed = 3});
  HybridConfig config;
  config.K = 3;
  config.n_iter = 200;
  config.lambda = 0.01;
  const TrainingData data{20, 15, planted.train, planted.validation};
  int calls = 0;
  const auto fit = fit_lfm(config, data, {}, [&](int it, const ParamSet&) { CHECK(it == ++calls); });
  REQUIRE(fit.trace.size() == 200);
  CHECK(calls == 200);
  CHECK(fit.trace.back().train_objective < fit.trace.front().train_objective);
  CHECK(fit.trace.back().val_mse < fit.trace.front().val_mse);
  CHECK(std::isfinite(fit.trace.back().val_mse));

  const auto again = fit_lfm(config, data);
  CHECK(again.params.P == fit.params.P);
  CHECK(again.params.alpha == fit.params.alpha);
}

TEST_CASE("empty validation gives NaN in the trace") {
  const std::vector<Rating> train{{0, 0, 4.0}, {1, 1, 2.0}};
  HybridConfig config;
  config.n_iter = 3;
  const auto fit = fit_lfm(config, TrainingData{2, 2, train, {}});
  CHECK(std::isnan(fit.trace.back().val_mse));
}

TEST_CASE("rating statistics and the closed-form baselines") {
  const auto stats = compute_rating_stats(kHandRatings, 3, 3);
  CHECK(stats.alpha == doctest::Approx(10.0 / 3.0));
  CHECK(stats.r_bar_user(0) == doctest::Approx(4.5 - 10.0 / 3.0));
  CHECK(stats.r_bar_user(1) == doctest::Approx(1.0 - 10.0 / 3.0));
  CHECK(stats.r_bar_user(2) == 0.0);
  CHECK(stats.r_bar_item(0) == doctest::Approx(4.0 - 10.0 / 3.0));
  CHECK(stats.r_bar_item(1) == doctest::Approx(3.0 - 10.0 / 3.0));
  CHECK(offset_predict(stats) == doctest::Approx(10.0 / 3.0));
  CHECK(baseline_predict(stats, 0, 1) == doctest::Approx(10.0 / 3.0 + 4.5 - 10.0 / 3.0 + 3.0 - 10.0 / 3.0));
}

}
