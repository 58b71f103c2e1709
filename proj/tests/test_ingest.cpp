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

#include <algorithm>
#include <set>
#include <sstream>

#include "ldalfm/ingest.hpp"
#include "synthetic.hpp"
#include "tempdir.hpp"

using namespace ldalfm;

namespace {

Interaction rec(std::string u, std::string i, double r = 4.0, std::int64_t t = 0, std::string text = "") {
  return {std::move(u), std::move(i), r, std::move(text), t};
}

std::set<std::string> ids(const std::vector<Interaction>& part, bool users) {
  std::set<std::string> out;
  for (const auto& r : part) out.insert(users ? r.user_id : r.item_id);
  return out;
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("parse keeps valid lines and reports the rest") {
  std::istringstream in(
      R"({"reviewerID":"A","asin":"X","overall":5.0,"reviewText":"good","unixReviewTime":10})" "\n"
      "not json\n"
      R"({"reviewerID":"B","asin":"X","overall":7,"unixReviewTime":11})" "\n"
      R"({"reviewerID":"C","asin":"Y","overall":2,"unixReviewTime":12})" "\n"
      R"({"reviewerID":"D","overall":3,"unixReviewTime":13})" "\n"
      "\n");
  const auto report = parse_reviews(in);
  REQUIRE(report.interactions.size() == 2);
  CHECK(report.interactions[0] == rec("A", "X", 5.0, 10, "good"));
  CHECK(report.interactions[1] == rec("C", "Y", 2.0, 12, ""));
  REQUIRE(report.errors.size() == 3);
  CHECK(report.errors[0].line == 2);
  CHECK(report.errors[1].line == 3);
  CHECK(report.errors[1].message.find("out of range") != std::string::npos);
  CHECK(report.errors[2].line == 5);
  CHECK(report.errors[2].message.find("asin") != std::string::npos);
}

TEST_CASE("parse rejects input with no valid interaction") {
  std::istringstream in("garbage\n{}\n");
  CHECK_THROWS_AS(parse_reviews(in), IngestError);
}

TEST_CASE("write and parse round-trip") {
  const std::vector<Interaction> data{rec("u1", "i1", 3.0, 5, "text with \"quotes\""), rec("u2", "i1", 1.0, 6)};
  std::ostringstream out;
  write_reviews(out, data);
  std::istringstream in(out.str());
  CHECK(parse_reviews(in).interactions == data);
}

TEST_CASE("deduplicate keeps the first of identical records") {
  const std::vector<Interaction> data{rec("u", "i", 5, 1, "a"), rec("u", "i", 4, 1, "a"), rec("u", "i", 5, 2, "a")};
  const auto out = deduplicate(data);
  REQUIRE(out.size() == 2);
  CHECK(out[0].rating == 5.0);
  CHECK(out[1].timestamp == 2);
}

TEST_CASE("k-core drops sparse users and items") {
  const std::vector<Interaction> data{rec("u1", "i1"), rec("u1", "i2"), rec("u2", "i1"), rec("u2", "i2"),
                                      rec("u3", "i1")};
  const auto out = k_core_filter(data, 2);
  CHECK(out.size() == 4);
  CHECK(ids(out, true) == std::set<std::string>{"u1", "u2"});
}

TEST_CASE("k-core removal cascades") {
  const std::vector<Interaction> data{rec("u1", "i1"), rec("u1", "i2"), rec("u2", "i2"), rec("u2", "i3")};
  CHECK(k_core_filter(data, 2).empty());
  CHECK(k_core_filter(data, 1).size() == 4);
  CHECK_THROWS(k_core_filter(data, 0));
}

TEST_CASE("k-core survivors all meet the threshold") {
  const auto data = testing::make_reviews(40, 30, 0.15, 5);
  for (int k : {2, 3, 5}) {
    const auto out = k_core_filter(data, k);
    std::map<std::string, int> users, items;
    for (const auto& r : out) {
      ++users[r.user_id];
      ++items[r.item_id];
    }
    for (const auto& [id, n] : users) CHECK(n >= k);
    for (const auto& [id, n] : items) CHECK(n >= k);
  }
}

TEST_CASE("split proportions and id order") {
  std::vector<Interaction> data;
  for (int u = 0; u < 10; ++u) {
    for (int i = 0; i < 10; ++i) data.push_back(rec("u" + std::to_string(u), "i" + std::to_string(i)));
  }
  const auto split = split_dataset(data, 1);
  CHECK(split.counts.train == 80);
  CHECK(split.counts.validation + split.counts.pruned_validation == 10);
  CHECK(split.counts.test + split.counts.pruned_test == 10);
  CHECK(split.train.size() == 80);

  int expected = 0;
  for (const auto& [id, dense] : split.item_index) CHECK(dense == expected++);
  CHECK(std::is_sorted(split.user_index.begin(), split.user_index.end()));
  CHECK_THROWS(split_dataset(std::span(data).first(9), 1));
}

TEST_CASE("split partitions keep input order") {
  std::vector<Interaction> data;
  for (int n = 0; n < 50; ++n) data.push_back(rec("u" + std::to_string(n % 5), "i" + std::to_string(n % 7), 3, n));
  const auto split = split_dataset(data, 8);
  for (const auto* part : {&split.train, &split.validation, &split.test}) {
    CHECK(std::is_sorted(part->begin(), part->end(),
                         [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; }));
  }
}

TEST_CASE("cold-start records never reach validation or test") {
  const auto data = k_core_filter(testing::make_reviews(30, 25, 0.2, 11), 2);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto split = split_dataset(data, seed);
    const auto train_users = ids(split.train, true);
    const auto train_items = ids(split.train, false);
    for (const auto* part : {&split.validation, &split.test}) {
      for (const auto& r : *part) {
        REQUIRE(train_users.count(r.user_id) == 1);
        REQUIRE(train_items.count(r.item_id) == 1);
      }
    }
    REQUIRE(split.n_users() == static_cast<int>(train_users.size()));
    REQUIRE(split.n_items() == static_cast<int>(train_items.size()));
  }
}

TEST_CASE("split is a function of the seed") {
  const auto data = testing::make_reviews(20, 20, 0.3, 2);
  const auto a = split_dataset(data, 5);
  const auto b = split_dataset(data, 5);
  const auto c = split_dataset(data, 6);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(a.train != c.train);
}

TEST_CASE("dense ratings use the index") {
  std::vector<Interaction> data;
  for (int n = 0; n < 20; ++n) data.push_back(rec("u" + std::to_string(n % 4), "i" + std::to_string(n % 5), 1 + n % 5));
  const auto split = split_dataset(data, 3);
  const auto ratings = split.ratings(split.train);
  REQUIRE(ratings.size() == split.train.size());
  for (std::size_t n = 0; n < ratings.size(); ++n) {
    CHECK(ratings[n].user == split.user_index.at(split.train[n].user_id));
    CHECK(ratings[n].item == split.item_index.at(split.train[n].item_id));
    CHECK(ratings[n].value == split.train[n].rating);
  }
  const std::vector<Interaction> unknown{rec("nobody", "i0")};
  CHECK_THROWS_AS(split.ratings(unknown), std::out_of_range);
}

TEST_CASE("saved splits load back unchanged") {
  testing::TempDir dir;
  const auto split = split_dataset(testing::make_reviews(15, 15, 0.4, 4), 9);
  save_split(split, dir.path().string());
  const auto loaded = load_split(dir.path().string());
  CHECK(loaded.train == split.train);
  CHECK(loaded.validation == split.validation);
  CHECK(loaded.test == split.test);
  CHECK(loaded.user_index == split.user_index);
  CHECK(loaded.item_index == split.item_index);
  CHECK(loaded.seed == split.seed);
  CHECK_THROWS_AS(load_split((dir / "missing")), IngestError);
}

}
