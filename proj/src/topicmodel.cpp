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

#include "ldalfm/topicmodel.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

namespace ldalfm {

void TopicState::validate(std::span<const ItemDocument> docs) const {
  if (z.size() != docs.size()) {
    throw std::invalid_argument("TopicState: " + std::to_string(z.size()) + " documents, corpus has " +
                                std::to_string(docs.size()));
  }
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (z[d].size() != docs[d].words.size()) {
      throw std::invalid_argument("TopicState: length mismatch in document " + std::to_string(d));
    }
    for (int k : z[d]) {
      if (k < 0 || k >= K) throw std::invalid_argument("TopicState: topic index out of range");
    }
  }
}

TopicCounts TopicCounts::tally(std::span<const ItemDocument> docs, const TopicState& state,
                               int vocab) {
  TopicCounts c;
  c.doc_topic = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(docs.size()), state.K);
  c.topic_word = Eigen::MatrixXi::Zero(state.K, vocab);
  c.topic_total = Eigen::VectorXi::Zero(state.K);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (std::size_t j = 0; j < docs[d].words.size(); ++j) {
      const int k = state.z[d][j];
      ++c.doc_topic(static_cast<Eigen::Index>(d), k);
      ++c.topic_word(k, docs[d].words[j]);
      ++c.topic_total(k);
    }
  }
  return c;
}

double corpus_log_likelihood(std::span<const ItemDocument> docs, const TopicDistributions& dists,
                             const TopicState& state) {
  double total = 0.0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (std::size_t j = 0; j < docs[d].words.size(); ++j) {
      const int k = state.z[d][j];
      total += std::log(dists.theta(static_cast<Eigen::Index>(d), k) *
                        dists.phi(k, docs[d].words[j]));
    }
  }
  return total;
}

TopicState random_topics(std::span<const ItemDocument> docs, int K, Rng& rng) {
  TopicState state;
  state.K = K;
  state.z.resize(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    state.z[d].resize(docs[d].words.size());
    for (int& k : state.z[d]) k = static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
  }
  return state;
}

int draw_categorical(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::logic_error("draw_categorical: weights sum to zero or are not finite");
  }
  const double target = rng.uniform() * total;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    cumulative += weights[k];
    if (target < cumulative) return static_cast<int>(k);
  }
  // target can reach the rounded total; fall back to the last positive weight.
  for (std::size_t k = weights.size(); k-- > 0;) {
    if (weights[k] > 0.0) return static_cast<int>(k);
  }
  return 0;
}

SampledTopics sample_topics(std::span<const ItemDocument> docs, const TopicDistributions& dists,
                            Rng& rng) {
  const int K = dists.topics();
  SampledTopics out;
  out.state.K = K;
  out.state.z.resize(docs.size());
  std::vector<double> weights(static_cast<std::size_t>(K));
  for (std::size_t d = 0; d < docs.size(); ++d) {
    out.state.z[d].resize(docs[d].words.size());
    const auto theta = dists.theta.row(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < docs[d].words.size(); ++j) {
      const int w = docs[d].words[j];
      for (int k = 0; k < K; ++k) weights[static_cast<std::size_t>(k)] = theta(k) * dists.phi(k, w);
      const int k = draw_categorical(weights, rng);
      out.state.z[d][j] = k;
      out.log_likelihood += std::log(weights[static_cast<std::size_t>(k)]);
    }
  }
  return out;
}

TopicState sample_topics(std::span<const ItemDocument> docs, const TopicDistributions& dists,
                         std::uint64_t seed) {
  Rng rng(seed);
  return sample_topics(docs, dists, rng).state;
}

CollapsedGibbsLda::CollapsedGibbsLda(std::span<const ItemDocument> docs, int vocab, int K,
                                     double gamma, double nu, std::uint64_t seed)
    : docs_(docs), vocab_(vocab), K_(K), gamma_(gamma), nu_(nu), rng_(seed) {
  if (K < 1) throw std::invalid_argument("fit_lda_gibbs: K must be >= 1");
  if (vocab < 1) throw std::invalid_argument("fit_lda_gibbs: vocabulary is empty");
  if (!(gamma > 0.0) || !(nu > 0.0)) throw std::invalid_argument("fit_lda_gibbs: gamma, nu must be > 0");
  state_ = random_topics(docs, K, rng_);
  counts_ = TopicCounts::tally(docs, state_, vocab);
  weights_.resize(static_cast<std::size_t>(K));
}

void CollapsedGibbsLda::sweep() {
  const double v_nu = vocab_ * nu_;
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    const auto di = static_cast<Eigen::Index>(d);
    for (std::size_t j = 0; j < docs_[d].words.size(); ++j) {
      const int w = docs_[d].words[j];
      int& z = state_.z[d][j];
      --counts_.doc_topic(di, z);
      --counts_.topic_word(z, w);
      --counts_.topic_total(z);
      for (int k = 0; k < K_; ++k) {
        weights_[static_cast<std::size_t>(k)] = (counts_.doc_topic(di, k) + gamma_) *
                                                (counts_.topic_word(k, w) + nu_) /
                                                (counts_.topic_total(k) + v_nu);
      }
      z = draw_categorical(weights_, rng_);
      ++counts_.doc_topic(di, z);
      ++counts_.topic_word(z, w);
      ++counts_.topic_total(z);
    }
  }
  ++sweeps_;
}

TopicDistributions CollapsedGibbsLda::estimates() const {
  TopicDistributions dists;
  const auto M = static_cast<Eigen::Index>(docs_.size());
  dists.theta.resize(M, K_);
  for (Eigen::Index d = 0; d < M; ++d) {
    const double n_d = static_cast<double>(docs_[static_cast<std::size_t>(d)].words.size());
    dists.theta.row(d) = (counts_.doc_topic.row(d).cast<double>().array() + gamma_) / (n_d + K_ * gamma_);
  }
  dists.phi.resize(K_, vocab_);
  for (int k = 0; k < K_; ++k) {
    dists.phi.row(k) = (counts_.topic_word.row(k).cast<double>().array() + nu_) /
                       (counts_.topic_total(k) + vocab_ * nu_);
  }
  return dists;
}

GibbsResult fit_lda_gibbs(std::span<const ItemDocument> docs, int vocab, int K, double gamma,
                          double nu, int n_sweeps, std::uint64_t seed) {
  if (n_sweeps < 0) throw std::invalid_argument("fit_lda_gibbs: n_sweeps must be >= 0");
  CollapsedGibbsLda sampler(docs, vocab, K, gamma, nu, seed);
  for (int s = 0; s < n_sweeps; ++s) sampler.sweep();
  return {sampler.estimates(), sampler.state()};
}

void write_topic_dump(const RowMatrix& phi, const Vocabulary& vocab, const std::string& path,
                      int top_n) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "topic,rank,word,phi\n";
  for (Eigen::Index k = 0; k < phi.rows(); ++k) {
    std::vector<int> order(static_cast<std::size_t>(phi.cols()));
    std::iota(order.begin(), order.end(), 0);
    const auto keep = std::min<std::size_t>(order.size(), static_cast<std::size_t>(top_n));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](int a, int b) { return phi(k, a) > phi(k, b) || (phi(k, a) == phi(k, b) && a < b); });
    for (std::size_t r = 0; r < keep; ++r) {
      const int w = order[r];
      const std::string& word = w < vocab.size() ? vocab.tokens[static_cast<std::size_t>(w)] : std::string("?");
      out << fmt::format("{},{},{},{:.10g}\n", k, r + 1, word, phi(k, w));
    }
  }
}

}  // namespace ldalfm
