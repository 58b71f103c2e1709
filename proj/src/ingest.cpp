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

#include "ldalfm/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "ldalfm/rng.hpp"

namespace ldalfm {

using nlohmann::json;

namespace {

Interaction interaction_from_json(const json& obj) {
  if (!obj.is_object()) throw std::invalid_argument("line is not a JSON object");
  auto require = [&](const char* key) -> const json& {
    auto it = obj.find(key);
    if (it == obj.end()) throw std::invalid_argument(std::string("missing key '") + key + "'");
    return *it;
  };
  Interaction rec;
  const json& user = require("reviewerID");
  const json& item = require("asin");
  const json& overall = require("overall");
  const json& time = require("unixReviewTime");
  if (!user.is_string()) throw std::invalid_argument("reviewerID is not a string");
  if (!item.is_string()) throw std::invalid_argument("asin is not a string");
  if (!overall.is_number()) throw std::invalid_argument("overall is not a number");
  if (!time.is_number_integer()) throw std::invalid_argument("unixReviewTime is not an integer");
  rec.user_id = user.get<std::string>();
  rec.item_id = item.get<std::string>();
  rec.rating = overall.get<double>();
  rec.timestamp = time.get<std::int64_t>();
  if (!std::isfinite(rec.rating) || rec.rating < 1.0 || rec.rating > 5.0) {
    throw std::invalid_argument("overall out of range [1,5]: " + overall.dump());
  }
  if (auto it = obj.find("reviewText"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw std::invalid_argument("reviewText is not a string");
    rec.review_text = it->get<std::string>();
  }
  return rec;
}

json interaction_to_json(const Interaction& rec) {
  json obj;
  obj["reviewerID"] = rec.user_id;
  obj["asin"] = rec.item_id;
  obj["overall"] = rec.rating;
  obj["reviewText"] = rec.review_text;
  obj["unixReviewTime"] = rec.timestamp;
  return obj;
}

std::vector<Interaction> read_jsonl_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string());
  auto report = parse_reviews(in);
  if (!report.errors.empty()) {
    throw IngestError(path.string() + ":" + std::to_string(report.errors.front().line) + ": " +
                      report.errors.front().message);
  }
  return std::move(report.interactions);
}

void write_jsonl_file(const std::filesystem::path& path, std::span<const Interaction> data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write " + path.string());
  write_reviews(out, data);
}

}  // namespace

ParseReport parse_reviews(std::istream& source) {
  ParseReport report;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      report.interactions.push_back(interaction_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      report.errors.push_back({line_no, e.what()});
    }
  }
  if (report.interactions.empty()) throw IngestError("no valid interactions");
  return report;
}

void write_reviews(std::ostream& out, std::span<const Interaction> data) {
  for (const auto& rec : data) out << interaction_to_json(rec).dump() << '\n';
}

std::vector<Interaction> deduplicate(std::span<const Interaction> data) {
  std::set<std::tuple<std::string_view, std::string_view, std::int64_t, std::string_view>> seen;
  std::vector<Interaction> out;
  out.reserve(data.size());
  for (const auto& rec : data) {
    if (seen.emplace(rec.user_id, rec.item_id, rec.timestamp, rec.review_text).second) {
      out.push_back(rec);
    }
  }
  return out;
}

std::vector<Interaction> k_core_filter(std::span<const Interaction> data, int k) {
  if (k < 1) throw std::invalid_argument("k_core_filter: k must be >= 1");
  std::vector<bool> alive(data.size(), true);
  bool changed = true;
  while (changed) {
    changed = false;
    std::unordered_map<std::string_view, int> user_count, item_count;
    for (std::size_t n = 0; n < data.size(); ++n) {
      if (!alive[n]) continue;
      ++user_count[data[n].user_id];
      ++item_count[data[n].item_id];
    }
    for (std::size_t n = 0; n < data.size(); ++n) {
      if (!alive[n]) continue;
      if (user_count[data[n].user_id] < k || item_count[data[n].item_id] < k) {
        alive[n] = false;
        changed = true;
      }
    }
  }
  std::vector<Interaction> out;
  for (std::size_t n = 0; n < data.size(); ++n) {
    if (alive[n]) out.push_back(data[n]);
  }
  return out;
}

std::vector<Rating> DatasetSplit::ratings(std::span<const Interaction> part) const {
  std::vector<Rating> out;
  out.reserve(part.size());
  for (const auto& rec : part) {
    auto u = user_index.find(rec.user_id);
    auto i = item_index.find(rec.item_id);
    if (u == user_index.end() || i == item_index.end()) {
      throw std::out_of_range("unindexed id in (" + rec.user_id + ", " + rec.item_id + ")");
    }
    out.push_back({u->second, i->second, rec.rating});
  }
  return out;
}

DatasetSplit split_dataset(std::span<const Interaction> data, std::uint64_t seed) {
  if (data.size() < 10) throw std::invalid_argument("split_dataset: need at least 10 interactions");
  const std::size_t n = data.size();
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_val = (n - n_train) / 2;

  // Fisher-Yates; position in the shuffled order decides the partition.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t j = n - 1; j > 0; --j) {
    std::swap(order[j], order[rng.below(j + 1)]);
  }
  std::vector<int> part(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    part[order[pos]] = pos < n_train ? 0 : (pos < n_train + n_val ? 1 : 2);
  }

  DatasetSplit split;
  split.seed = seed;
  for (std::size_t j = 0; j < n; ++j) {
    if (part[j] == 0) split.train.push_back(data[j]);
  }
  std::set<std::string> users, items;
  for (const auto& rec : split.train) {
    users.insert(rec.user_id);
    items.insert(rec.item_id);
  }
  int next = 0;
  for (const auto& u : users) split.user_index.emplace(u, next++);
  next = 0;
  for (const auto& i : items) split.item_index.emplace(i, next++);

  for (std::size_t j = 0; j < n; ++j) {
    if (part[j] == 0) continue;
    const bool known = users.count(data[j].user_id) && items.count(data[j].item_id);
    auto& dest = part[j] == 1 ? split.validation : split.test;
    auto& pruned = part[j] == 1 ? split.counts.pruned_validation : split.counts.pruned_test;
    if (known) {
      dest.push_back(data[j]);
    } else {
      ++pruned;
    }
  }
  split.counts.train = split.train.size();
  split.counts.validation = split.validation.size();
  split.counts.test = split.test.size();
  return split;
}

void save_split(const DatasetSplit& split, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_jsonl_file(fs::path(dir) / "train.jsonl", split.train);
  write_jsonl_file(fs::path(dir) / "validation.jsonl", split.validation);
  write_jsonl_file(fs::path(dir) / "test.jsonl", split.test);
  json index;
  index["user_index"] = split.user_index;
  index["item_index"] = split.item_index;
  index["seed"] = split.seed;
  index["counts"] = {{"train", split.counts.train},
                     {"validation", split.counts.validation},
                     {"test", split.counts.test},
                     {"pruned_validation", split.counts.pruned_validation},
                     {"pruned_test", split.counts.pruned_test}};
  std::ofstream out(fs::path(dir) / "index.json", std::ios::binary);
  out << index.dump(2) << '\n';
}

DatasetSplit load_split(const std::string& dir) {
  namespace fs = std::filesystem;
  DatasetSplit split;
  std::ifstream in(fs::path(dir) / "index.json");
  if (!in) throw IngestError("cannot open " + (fs::path(dir) / "index.json").string());
  const json index = json::parse(in);
  split.user_index = index.at("user_index").get<std::map<std::string, int>>();
  split.item_index = index.at("item_index").get<std::map<std::string, int>>();
  split.seed = index.at("seed").get<std::uint64_t>();
  const json& c = index.at("counts");
  split.counts = {c.at("train"), c.at("validation"), c.at("test"), c.at("pruned_validation"),
                  c.at("pruned_test")};
  // An empty partition file is legal (everything pruned); parse_reviews rejects it.
  auto load = [&](const char* name) -> std::vector<Interaction> {
    const auto path = fs::path(dir) / name;
    if (!fs::exists(path)) throw IngestError("missing " + path.string());
    if (fs::file_size(path) == 0) return {};
    return read_jsonl_file(path);
  };
  split.train = load("train.jsonl");
  split.validation = load("validation.jsonl");
  split.test = load("test.jsonl");
  return split;
}

}  // namespace ldalfm
