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

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ldalfm/params.hpp"
#include "ldalfm/rng.hpp"
#include "ldalfm/textprep.hpp"

namespace ldalfm {

/// Row-wise softmax with the row max subtracted before exponentiation.
template <typename Derived>
RowMatrixT<typename Derived::Scalar> row_softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  RowMatrixT<Scalar> out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const Scalar top = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - top).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

/// theta_{i,k} = softmax_k(kappa * q_{i,k}) over the first K columns of Q;
/// extra columns beyond K never enter.
template <typename Derived>
RowMatrixT<typename Derived::Scalar> theta_from_q(const Eigen::MatrixBase<Derived>& Q,
                                                  typename Derived::Scalar kappa, int K) {
  if (K < 1 || Q.cols() < K) {
    throw std::invalid_argument("theta_from_q: Q has " + std::to_string(Q.cols()) +
                                " columns, need K = " + std::to_string(K));
  }
  if (!std::isfinite(kappa) || !Q.leftCols(K).allFinite()) {
    throw std::invalid_argument("theta_from_q: non-finite input");
  }
  return row_softmax(kappa * Q.leftCols(K));
}

/// phi_k = softmax(psi_k), row by row.
template <typename Derived>
RowMatrixT<typename Derived::Scalar> phi_from_psi(const Eigen::MatrixBase<Derived>& psi) {
  if (!psi.allFinite()) throw std::invalid_argument("phi_from_psi: non-finite psi");
  return row_softmax(psi);
}

/// theta is M x K (one row per document), phi is K x V.
struct TopicDistributions {
  RowMatrix theta;
  RowMatrix phi;

  int topics() const { return static_cast<int>(phi.rows()); }
};

/// Topic index of every word position, z[d][j] in [0, K).
struct TopicState {
  int K = 1;
  std::vector<std::vector<int>> z;

  /// Throws unless the shape matches docs and every entry is in range.
  void validate(std::span<const ItemDocument> docs) const;
};

/// n_{d,k}, n_{k,w} and n_k tallied from an assignment.
struct TopicCounts {
  Eigen::MatrixXi doc_topic;   // M x K
  Eigen::MatrixXi topic_word;  // K x V
  Eigen::VectorXi topic_total; // K

  static TopicCounts tally(std::span<const ItemDocument> docs, const TopicState& state, int vocab);
  friend bool operator==(const TopicCounts& a, const TopicCounts& b) {
    return a.doc_topic == b.doc_topic && a.topic_word == b.topic_word &&
           a.topic_total == b.topic_total;
  }
};

/// sum_d sum_j log(theta_{d,z} phi_{z,w}), evaluated term by term.
double corpus_log_likelihood(std::span<const ItemDocument> docs, const TopicDistributions& dists,
                             const TopicState& state);

/// Uniform random topic per word position.
TopicState random_topics(std::span<const ItemDocument> docs, int K, Rng& rng);

struct SampledTopics {
  TopicState state;
  /// Log-likelihood of the drawn assignment, accumulated while drawing.
  double log_likelihood = 0.0;
};

/// Independent categorical draw per position with weights theta_{d,k} phi_{k,w},
/// documents and positions visited in index order.
SampledTopics sample_topics(std::span<const ItemDocument> docs, const TopicDistributions& dists,
                            Rng& rng);
TopicState sample_topics(std::span<const ItemDocument> docs, const TopicDistributions& dists,
                         std::uint64_t seed);

/// Categorical draw over unnormalised non-negative weights; zero weights are
/// never selected.
int draw_categorical(std::span<const double> weights, Rng& rng);

/// Standard collapsed Gibbs sampler for LDA with symmetric priors gamma (doc-topic)
/// and nu (topic-word). Count caches are kept incrementally.
class CollapsedGibbsLda {
 public:
  CollapsedGibbsLda(std::span<const ItemDocument> docs, int vocab, int K, double gamma, double nu,
                    std::uint64_t seed);

  void sweep();
  int sweeps_done() const { return sweeps_; }

  const TopicState& state() const { return state_; }
  const TopicCounts& counts() const { return counts_; }

  /// Posterior means (n_dk + gamma) / (N_d + K gamma) and (n_kw + nu) / (n_k + V nu).
  TopicDistributions estimates() const;

 private:
  std::span<const ItemDocument> docs_;
  int vocab_;
  int K_;
  double gamma_;
  double nu_;
  Rng rng_;
  TopicState state_;
  TopicCounts counts_;
  std::vector<double> weights_;
  int sweeps_ = 0;
};

struct GibbsResult {
  TopicDistributions dists;
  TopicState state;
};

GibbsResult fit_lda_gibbs(std::span<const ItemDocument> docs, int vocab, int K, double gamma,
                          double nu, int n_sweeps, std::uint64_t seed);

/// Writes "topic,rank,word,phi" for the top_n words of every topic.
void write_topic_dump(const RowMatrix& phi, const Vocabulary& vocab, const std::string& path,
                      int top_n = 10);

}  // namespace ldalfm
