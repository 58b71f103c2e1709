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

#include "ldalfm/lfm.hpp"
#include "ldalfm/model_config.hpp"
#include "ldalfm/params.hpp"
#include "ldalfm/textprep.hpp"
#include "ldalfm/topicmodel.hpp"

namespace ldalfm {

/// Objective of the joint rating/topic model at fixed topic assignments:
///
///   sum (r - r_hat)^2
///     + lambda (||P||^2 + ||b_item||^2 + ||b_user||^2 + ||Q[:, K:]||^2)
///     - mu * sum_d sum_j log(theta_{d,z} phi_{z,w})
///
/// with theta = theta_from_q(Q, kappa, K) and phi = phi_from_psi(psi). The
/// first K columns of Q carry no L2 term; the likelihood regularises them.
/// docs must be empty or hold exactly one document per item, document d
/// belonging to item d.
double joint_objective(const ParamSet& params, std::span<const Rating> train,
                       std::span<const ItemDocument> docs, const TopicState& state, double lambda,
                       double mu);

/// Analytic gradient of joint_objective. With n_{d,k}, n_{k,w}, n_k the
/// assignment counts and N_d the document length:
///   dQ[d,k]  (k < K) += -mu kappa (n_{d,k} - N_d theta_{d,k})
///   dpsi[k,w]        += -mu (n_{k,w} - n_k phi_{k,w})
///   dkappa           += -mu sum_d sum_k (n_{d,k} - N_d theta_{d,k}) q_{d,k}
/// on top of the rating and penalty terms. Columns K.. of Q never receive a
/// likelihood contribution.
ParamSet joint_gradient(const ParamSet& params, std::span<const Rating> train,
                        std::span<const ItemDocument> docs, const TopicState& state, double lambda,
                        double mu);

/// Column layout of P and Q once K* extra features are added.
struct FeatureLayout {
  int factor_cols = 0;  // K + K*, used by the rating dot product
  int topic_cols = 0;   // K, the softmax / LDA-linked prefix
  int extra_begin = 0;  // first extra column (== K)
  int extra_cols = 0;   // K*, regularised by lambda in the joint objective
};

FeatureLayout extend_with_extra_features(const HybridConfig& config);

struct HybridFit {
  ParamSet params;
  TopicState topics;
  FitTrace trace;
};

/// Two-step fitting: per outer iteration, inner_steps full-batch Adam
/// updates of every block at fixed z, then z resampled from the updated
/// theta and phi. Returns the last iterate. Throws DivergenceError when the
/// objective stops being finite or exceeds config.divergence_limit.
HybridFit fit_lda_lfm(const HybridConfig& config, const TrainingData& data, const Corpus& corpus,
                      const IterationObserver& observer = {});

struct LdaFirstFit {
  ParamSet params;
  FitTrace trace;
  GibbsResult lda;
};

/// Baseline: fit collapsed-Gibbs LDA on the item documents, freeze Q at the
/// estimated theta (K* forced to 0, psi set to log phi), then train alpha,
/// b_user, b_item and P on the normalised rating objective.
LdaFirstFit fit_ldafirst(const HybridConfig& config, const TrainingData& data, const Corpus& corpus,
                         const IterationObserver& observer = {});

}  // namespace ldalfm
