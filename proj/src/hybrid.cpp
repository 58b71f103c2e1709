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

#include "ldalfm/hybrid.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ldalfm/adam.hpp"
#include "ldalfm/metrics.hpp"
#include "ldalfm/rng.hpp"
#include "penalty.hpp"

namespace ldalfm {

namespace {

void check_corpus(const ParamSet& params, std::span<const ItemDocument> docs,
                  const TopicState& state) {
  if (docs.empty()) return;
  if (static_cast<int>(docs.size()) != params.n_items()) {
    throw std::invalid_argument("corpus has " + std::to_string(docs.size()) +
                                " documents but the model has " + std::to_string(params.n_items()) +
                                " items");
  }
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (docs[d].item != static_cast<int>(d)) {
      throw std::invalid_argument("document " + std::to_string(d) + " belongs to item " +
                                  std::to_string(docs[d].item));
    }
    for (int w : docs[d].words) {
      if (w < 0 || w >= params.vocab()) {
        throw std::invalid_argument("word index " + std::to_string(w) + " outside V = " +
                                    std::to_string(params.vocab()));
      }
    }
  }
  if (state.K != params.topics()) {
    throw std::invalid_argument("topic state has K = " + std::to_string(state.K) +
                                ", parameters have K = " + std::to_string(params.topics()));
  }
  state.validate(docs);
}

// log softmax(kappa * Q[:, :K]) row by row.
RowMatrix log_theta(const ParamSet& params) {
  const int K = params.topics();
  RowMatrix scaled = params.kappa * params.Q.leftCols(K);
  for (Eigen::Index r = 0; r < scaled.rows(); ++r) {
    const double top = scaled.row(r).maxCoeff();
    const double lse = top + std::log((scaled.row(r).array() - top).exp().sum());
    scaled.row(r).array() -= lse;
  }
  return scaled;
}

RowMatrix log_phi(const ParamSet& params) {
  RowMatrix out = params.psi;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double top = out.row(r).maxCoeff();
    const double lse = top + std::log((out.row(r).array() - top).exp().sum());
    out.row(r).array() -= lse;
  }
  return out;
}

double likelihood_from_counts(const ParamSet& params, const TopicCounts& counts) {
  const RowMatrix lt = log_theta(params);
  const RowMatrix lp = log_phi(params);
  return (counts.doc_topic.cast<double>().array() * lt.array()).sum() +
         (counts.topic_word.cast<double>().array() * lp.array()).sum();
}

double validation_mse(const ParamSet& params, std::span<const Rating> validation) {
  if (validation.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> truth;
  truth.reserve(validation.size());
  for (const auto& r : validation) truth.push_back(r.value);
  return mse(predict_ratings(params, validation), truth);
}

}  // namespace

double joint_objective(const ParamSet& params, std::span<const Rating> train,
                       std::span<const ItemDocument> docs, const TopicState& state, double lambda,
                       double mu) {
  if (!(lambda >= 0.0) || !(mu >= 0.0)) throw std::invalid_argument("lambda and mu must be >= 0");
  check_corpus(params, docs, state);
  double value = squared_error_sum(params, train);
  value += detail::l2_penalty(params.P, lambda);
  value += detail::l2_penalty(params.b_item, lambda);
  value += detail::l2_penalty(params.b_user, lambda);
  value += detail::l2_penalty(params.Q.rightCols(params.extra()), lambda);
  if (mu != 0.0 && !docs.empty()) {
    value -= mu * likelihood_from_counts(params, TopicCounts::tally(docs, state, params.vocab()));
  }
  return value;
}

ParamSet joint_gradient(const ParamSet& params, std::span<const Rating> train,
                        std::span<const ItemDocument> docs, const TopicState& state, double lambda,
                        double mu) {
  if (!(lambda >= 0.0) || !(mu >= 0.0)) throw std::invalid_argument("lambda and mu must be >= 0");
  check_corpus(params, docs, state);
  ParamSet grad = params.zeros_like();
  accumulate_squared_error_gradient(params, train, 1.0, grad);
  grad.P += (2.0 * lambda) * params.P;
  grad.b_item += (2.0 * lambda) * params.b_item;
  grad.b_user += (2.0 * lambda) * params.b_user;
  grad.Q.rightCols(params.extra()) += (2.0 * lambda) * params.Q.rightCols(params.extra());

  if (mu != 0.0 && !docs.empty()) {
    const int K = params.topics();
    const TopicCounts counts = TopicCounts::tally(docs, state, params.vocab());
    const RowMatrix theta = theta_from_q(params.Q, params.kappa, K);
    const RowMatrix phi = phi_from_psi(params.psi);

    double dkappa = 0.0;
    for (Eigen::Index d = 0; d < theta.rows(); ++d) {
      const double n_d = static_cast<double>(docs[static_cast<std::size_t>(d)].words.size());
      const Eigen::RowVectorXd residual =
          counts.doc_topic.row(d).cast<double>() - n_d * theta.row(d);
      grad.Q.row(d).head(K) += (-mu * params.kappa) * residual;
      dkappa += residual.dot(params.Q.row(d).head(K));
    }
    grad.kappa += -mu * dkappa;

    const Eigen::VectorXd n_k = counts.topic_total.cast<double>();
    grad.psi += -mu * (counts.topic_word.cast<double>() - (phi.array().colwise() * n_k.array()).matrix());
  }
  grad.check_finite("joint_gradient");
  return grad;
}

FeatureLayout extend_with_extra_features(const HybridConfig& config) {
  if (config.K < 1 || config.K_star < 0) throw std::invalid_argument("need K >= 1 and K* >= 0");
  return {config.K + config.K_star, config.K, config.K, config.K_star};
}

HybridFit fit_lda_lfm(const HybridConfig& config, const TrainingData& data, const Corpus& corpus,
                      const IterationObserver& observer) {
  config.validate();
  const auto& docs = corpus.documents;
  const int vocab = std::max(1, corpus.vocab_size());
  const ModelDims dims{data.n_users, data.n_items, config.K, config.K_star, vocab};

  HybridFit fit;
  fit.params = init_params(data.train, dims, derive_seed(config.seed, "init"), config.init_sigma,
                           config.kappa0);
  Rng topic_rng(derive_seed(config.seed, "topics"));
  fit.topics = random_topics(docs, config.K, topic_rng);
  check_corpus(fit.params, docs, fit.topics);

  AdamState adam(fit.params, AdamConfig{.lr = config.lr});
  for (int it = 1; it <= config.n_iter; ++it) {
    try {
      for (int step = 0; step < config.inner_steps; ++step) {
        adam_step(fit.params,
                  joint_gradient(fit.params, data.train, docs, fit.topics, config.lambda, config.mu),
                  adam);
      }
    } catch (const NonFiniteError& e) {
      throw DivergenceError(it, "iteration " + std::to_string(it) + ": " + e.what());
    }

    if (!docs.empty()) {
      const TopicDistributions dists{theta_from_q(fit.params.Q, fit.params.kappa, config.K),
                                     phi_from_psi(fit.params.psi)};
      fit.topics = sample_topics(docs, dists, topic_rng).state;
    }

    const double objective =
        joint_objective(fit.params, data.train, docs, fit.topics, config.lambda, config.mu);
    if (!std::isfinite(objective) || objective > config.divergence_limit) {
      throw DivergenceError(it, "iteration " + std::to_string(it) + ": objective " +
                                    std::to_string(objective) + " diverged");
    }
    fit.trace.push_back({it, objective, validation_mse(fit.params, data.validation)});
    if (observer) observer(it, fit.params);
  }
  return fit;
}

LdaFirstFit fit_ldafirst(const HybridConfig& config, const TrainingData& data, const Corpus& corpus,
                         const IterationObserver& observer) {
  HybridConfig cfg = config;
  cfg.K_star = 0;
  cfg.validate();
  if (static_cast<int>(corpus.documents.size()) != data.n_items) {
    throw std::invalid_argument("fit_ldafirst: need one document per item");
  }
  const int vocab = std::max(1, corpus.vocab_size());
  LdaFirstFit fit;
  fit.lda = fit_lda_gibbs(corpus.documents, vocab, cfg.K, cfg.gamma, cfg.nu, cfg.gibbs_sweeps,
                          derive_seed(cfg.seed, "gibbs"));

  const ModelDims dims{data.n_users, data.n_items, cfg.K, 0, vocab};
  ParamSet start = init_params(data.train, dims, derive_seed(cfg.seed, "init"), cfg.init_sigma,
                               cfg.kappa0);
  start.Q = fit.lda.dists.theta;
  start.psi = fit.lda.dists.phi.array().log().matrix();

  RatingLossOptions options;
  options.freeze_q = true;
  auto trained = train_rating_model(std::move(start), cfg, data, options, observer);
  fit.params = std::move(trained.params);
  fit.trace = std::move(trained.trace);
  return fit;
}

}  // namespace ldalfm
