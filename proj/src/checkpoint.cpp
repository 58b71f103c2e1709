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

#include "ldalfm/checkpoint.hpp"

#include <algorithm>
#include <fstream>

namespace ldalfm {

using nlohmann::json;

namespace {

template <typename M>
json matrix_to_json(const M& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

RowMatrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::runtime_error("checkpoint: matrix data does not match its rows x cols header");
  }
  RowMatrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

Vector vector_from_json(const json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(data.data(), static_cast<Eigen::Index>(data.size()));
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

double Checkpoint::predict(int user, int item) const {
  switch (model) {
    case ModelKind::offset:
      return offset_predict(stats.value());
    case ModelKind::baseline:
      return baseline_predict(stats.value(), user, item);
    default:
      return predict_rating(params.value(), user, item);
  }
}

std::vector<double> Checkpoint::predict(std::span<const Rating> ratings, bool clip) const {
  std::vector<double> out;
  out.reserve(ratings.size());
  for (const auto& r : ratings) {
    if (r.user < 0 || r.user >= n_users || r.item < 0 || r.item >= n_items) {
      throw std::out_of_range("checkpoint: rating for unknown (user, item) = (" +
                              std::to_string(r.user) + ", " + std::to_string(r.item) + ")");
    }
    const double p = predict(r.user, r.item);
    out.push_back(clip ? std::clamp(p, 1.0, 5.0) : p);
  }
  return out;
}

json params_to_json(const ParamSet& p) {
  return {{"K", p.topics()},
          {"K_star", p.extra()},
          {"V", p.vocab()},
          {"n_users", p.n_users()},
          {"n_items", p.n_items()},
          {"alpha", p.alpha},
          {"kappa", p.kappa},
          {"b_user", to_std(p.b_user)},
          {"b_item", to_std(p.b_item)},
          {"P", matrix_to_json(p.P)},
          {"Q", matrix_to_json(p.Q)},
          {"psi", matrix_to_json(p.psi)}};
}

ParamSet params_from_json(const json& j) {
  ParamSet p(j.at("n_users").get<int>(), j.at("n_items").get<int>(), j.at("K").get<int>(),
             j.at("K_star").get<int>(), j.at("V").get<int>());
  ParamSet loaded;
  loaded.alpha = j.at("alpha").get<double>();
  loaded.kappa = j.at("kappa").get<double>();
  loaded.b_user = vector_from_json(j.at("b_user"));
  loaded.b_item = vector_from_json(j.at("b_item"));
  loaded.P = matrix_from_json(j.at("P"));
  loaded.Q = matrix_from_json(j.at("Q"));
  loaded.psi = matrix_from_json(j.at("psi"));
  if (!loaded.same_shape(p)) throw std::runtime_error("checkpoint: parameter blocks disagree with the shape header");
  return loaded;
}

json config_to_json(const HybridConfig& c) {
  return {{"K", c.K},
          {"K_star", c.K_star},
          {"lambda", c.lambda},
          {"mu", c.mu},
          {"n_iter", c.n_iter},
          {"seed", c.seed},
          {"lr", c.lr},
          {"init_sigma", c.init_sigma},
          {"kappa0", c.kappa0},
          {"inner_steps", c.inner_steps},
          {"gamma", c.gamma},
          {"nu", c.nu},
          {"gibbs_sweeps", c.gibbs_sweeps},
          {"divergence_limit", c.divergence_limit}};
}

HybridConfig config_from_json(const json& j) {
  HybridConfig c;
  auto read = [&](const char* key, auto& field) {
    if (auto it = j.find(key); it != j.end()) field = it->get<std::decay_t<decltype(field)>>();
  };
  read("K", c.K);
  read("K_star", c.K_star);
  read("lambda", c.lambda);
  read("mu", c.mu);
  read("n_iter", c.n_iter);
  read("seed", c.seed);
  read("lr", c.lr);
  read("init_sigma", c.init_sigma);
  read("kappa0", c.kappa0);
  read("inner_steps", c.inner_steps);
  read("gamma", c.gamma);
  read("nu", c.nu);
  read("gibbs_sweeps", c.gibbs_sweeps);
  read("divergence_limit", c.divergence_limit);
  return c;
}

json checkpoint_to_json(const Checkpoint& ck) {
  json j;
  j["format"] = "ldalfm-checkpoint";
  j["version"] = Checkpoint::kFormatVersion;
  j["model"] = to_string(ck.model);
  j["config"] = config_to_json(ck.config);
  j["seed"] = ck.config.seed;
  j["K"] = ck.params ? ck.params->topics() : ck.config.K;
  j["K_star"] = ck.params ? ck.params->extra() : 0;
  j["V"] = ck.vocab_size;
  j["vocab_fingerprint"] = ck.vocab_fingerprint;
  j["n_users"] = ck.n_users;
  j["n_items"] = ck.n_items;
  if (ck.params) j["params"] = params_to_json(*ck.params);
  if (ck.stats) {
    j["stats"] = {{"alpha", ck.stats->alpha},
                  {"r_bar_user", to_std(ck.stats->r_bar_user)},
                  {"r_bar_item", to_std(ck.stats->r_bar_item)}};
  }
  if (ck.topics) j["topic_state"] = {{"K", ck.topics->K}, {"z", ck.topics->z}};
  return j;
}

Checkpoint checkpoint_from_json(const json& j) {
  if (j.value("format", "") != "ldalfm-checkpoint") throw std::runtime_error("not an ldalfm checkpoint");
  if (j.at("version").get<int>() != Checkpoint::kFormatVersion) {
    throw std::runtime_error("unsupported checkpoint version " + j.at("version").dump());
  }
  Checkpoint ck;
  ck.model = parse_model_kind(j.at("model").get<std::string>());
  ck.config = config_from_json(j.at("config"));
  ck.vocab_size = j.at("V").get<int>();
  ck.vocab_fingerprint = j.at("vocab_fingerprint").get<std::uint64_t>();
  ck.n_users = j.at("n_users").get<int>();
  ck.n_items = j.at("n_items").get<int>();
  if (j.contains("params")) ck.params = params_from_json(j.at("params"));
  if (j.contains("stats")) {
    const json& s = j.at("stats");
    ck.stats = RatingStats{s.at("alpha").get<double>(), vector_from_json(s.at("r_bar_user")),
                           vector_from_json(s.at("r_bar_item"))};
  }
  if (j.contains("topic_state")) {
    TopicState t;
    t.K = j.at("topic_state").at("K").get<int>();
    t.z = j.at("topic_state").at("z").get<std::vector<std::vector<int>>>();
    ck.topics = std::move(t);
  }
  const bool factor_model = ck.model != ModelKind::offset && ck.model != ModelKind::baseline;
  if (factor_model && !ck.params) throw std::runtime_error("checkpoint: missing params block");
  if (!factor_model && !ck.stats) throw std::runtime_error("checkpoint: missing stats block");
  return ck;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << checkpoint_to_json(ckpt).dump() << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  return checkpoint_from_json(json::parse(in));
}

}  // namespace ldalfm
