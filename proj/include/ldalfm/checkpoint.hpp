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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ldalfm/lfm.hpp"
#include "ldalfm/model_config.hpp"
#include "ldalfm/params.hpp"
#include "ldalfm/topicmodel.hpp"

namespace ldalfm {

/// A trained model as persisted on disk (JSON, format "ldalfm-checkpoint").
///
/// Factor models carry params (and, for lda_lfm, the final topic
/// assignment); offset and baseline carry stats. Doubles are written in
/// shortest round-trip form, so save -> load is exact.
struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  ModelKind model = ModelKind::offset;
  HybridConfig config;
  int n_users = 0;
  int n_items = 0;
  int vocab_size = 0;
  std::uint64_t vocab_fingerprint = 0;
  std::optional<ParamSet> params;
  std::optional<RatingStats> stats;
  std::optional<TopicState> topics;

  /// Rating prediction for dense ids; never clipped here.
  double predict(int user, int item) const;
  std::vector<double> predict(std::span<const Rating> ratings, bool clip = false) const;
};

nlohmann::json params_to_json(const ParamSet& params);
ParamSet params_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const HybridConfig& config);
/// Missing keys keep their defaults.
HybridConfig config_from_json(const nlohmann::json& j);

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ldalfm
