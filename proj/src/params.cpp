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

#include "ldalfm/params.hpp"

#include <cmath>

#include "ldalfm/rng.hpp"

namespace ldalfm {

namespace {

template <typename T, typename Params>
std::array<BasicBlockView<T>, 7> make_blocks(Params& p) {
  auto flat = [](auto& m) { return std::span<T>(m.data(), static_cast<std::size_t>(m.size())); };
  return {{{"alpha", std::span<T>(&p.alpha, 1)},
           {"b_user", flat(p.b_user)},
           {"b_item", flat(p.b_item)},
           {"P", flat(p.P)},
           {"Q", flat(p.Q)},
           {"psi", flat(p.psi)},
           {"kappa", std::span<T>(&p.kappa, 1)}}};
}

}  // namespace

ParamSet::ParamSet(int n_users, int n_items, int topics, int extra, int vocab)
    : b_user(Vector::Zero(n_users)),
      b_item(Vector::Zero(n_items)),
      P(RowMatrix::Zero(n_users, topics + extra)),
      Q(RowMatrix::Zero(n_items, topics + extra)),
      psi(RowMatrix::Zero(topics, vocab)),
      kappa(0.0) {
  if (n_users < 0 || n_items < 0 || topics < 1 || extra < 0 || vocab < 1) {
    throw std::invalid_argument("ParamSet: need K >= 1, K* >= 0, V >= 1");
  }
}

ParamSet ParamSet::zeros_like() const {
  return ParamSet(n_users(), n_items(), topics(), extra(), vocab());
}

bool ParamSet::same_shape(const ParamSet& o) const {
  return b_user.size() == o.b_user.size() && b_item.size() == o.b_item.size() &&
         P.rows() == o.P.rows() && P.cols() == o.P.cols() && Q.rows() == o.Q.rows() &&
         Q.cols() == o.Q.cols() && psi.rows() == o.psi.rows() && psi.cols() == o.psi.cols();
}

std::size_t ParamSet::size() const {
  return 2 + static_cast<std::size_t>(b_user.size() + b_item.size() + P.size() + Q.size() +
                                      psi.size());
}

void ParamSet::check_finite(std::string_view context) const {
  for (const auto& block : blocks(*this)) {
    for (double x : block.values) {
      if (!std::isfinite(x)) {
        throw NonFiniteError(std::string(block.name),
                             std::string(context) + ": non-finite value in block " +
                                 std::string(block.name));
      }
    }
  }
}

std::array<BlockView, 7> blocks(ParamSet& params) { return make_blocks<double>(params); }

std::array<ConstBlockView, 7> blocks(const ParamSet& params) {
  return make_blocks<const double>(params);
}

ParamSet init_params(std::span<const Rating> train, const ModelDims& dims, std::uint64_t seed,
                     double sigma, double kappa0) {
  if (train.empty()) throw std::invalid_argument("init_params: empty training set");
  ParamSet params(dims.n_users, dims.n_items, dims.topics, dims.extra, dims.vocab);
  double sum = 0.0;
  for (const auto& r : train) sum += r.value;
  params.alpha = sum / static_cast<double>(train.size());

  Rng rng(seed);
  for (auto& block : blocks(params)) {
    if (block.name == "alpha" || block.name == "kappa") continue;
    for (double& x : block.values) x = rng.normal(0.0, sigma);
  }
  params.kappa = kappa0;
  return params;
}

}  // namespace ldalfm
