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

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "ldalfm/ingest.hpp"

namespace ldalfm {

template <typename Scalar>
using RowMatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrix = RowMatrixT<double>;
using Vector = Eigen::VectorXd;

/// Raised when a parameter or gradient block becomes NaN/Inf.
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(std::string block, const std::string& what)
      : std::runtime_error(what), block_(std::move(block)) {}
  const std::string& block() const { return block_; }

 private:
  std::string block_;
};

/// Every trainable quantity of the rating and topic models.
///
/// P and Q carry K topic-linked columns followed by K* extra columns.
/// psi is K x V; its rows are the natural parameters of the topic-word
/// distributions. alpha and kappa are scalars.
struct ParamSet {
  double alpha = 0.0;
  Vector b_user;
  Vector b_item;
  RowMatrix P;
  RowMatrix Q;
  RowMatrix psi;
  double kappa = 1.0;

  ParamSet() = default;
  /// Zero-filled with the given shape; kappa starts at 0 as well.
  ParamSet(int n_users, int n_items, int topics, int extra, int vocab);

  int n_users() const { return static_cast<int>(b_user.size()); }
  int n_items() const { return static_cast<int>(b_item.size()); }
  int topics() const { return static_cast<int>(psi.rows()); }
  int extra() const { return static_cast<int>(Q.cols()) - topics(); }
  int factors() const { return static_cast<int>(Q.cols()); }
  int vocab() const { return static_cast<int>(psi.cols()); }

  /// Same shape, every entry zero.
  ParamSet zeros_like() const;
  bool same_shape(const ParamSet& other) const;
  std::size_t size() const;

  /// Throws NonFiniteError naming the first offending block.
  void check_finite(std::string_view context) const;
};

template <typename T>
struct BasicBlockView {
  std::string_view name;
  std::span<T> values;
};
using BlockView = BasicBlockView<double>;
using ConstBlockView = BasicBlockView<const double>;

/// The blocks as flat contiguous spans, in fixed order:
/// alpha, b_user, b_item, P, Q, psi, kappa.
std::array<BlockView, 7> blocks(ParamSet& params);
std::array<ConstBlockView, 7> blocks(const ParamSet& params);

struct ModelDims {
  int n_users = 0;
  int n_items = 0;
  int topics = 1;  // K
  int extra = 0;   // K*
  int vocab = 1;   // V
};

/// alpha = mean train rating, kappa = kappa0, everything else ~ N(0, sigma)
/// drawn in block order from Rng(seed).
ParamSet init_params(std::span<const Rating> train, const ModelDims& dims, std::uint64_t seed,
                     double sigma = 0.1, double kappa0 = 1.0);

}  // namespace ldalfm
