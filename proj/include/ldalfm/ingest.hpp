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
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ldalfm {

/// One review record.
struct Interaction {
  std::string user_id;
  std::string item_id;
  double rating = 0.0;
  std::string review_text;
  std::int64_t timestamp = 0;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

/// A rating with dense user/item ids.
struct Rating {
  int user = 0;
  int item = 0;
  double value = 0.0;
};

struct ParseError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct ParseReport {
  std::vector<Interaction> interactions;
  std::vector<ParseError> errors;
};

class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses JSON-lines review records (reviewerID, asin, overall, reviewText,
/// unixReviewTime). Malformed lines are recorded and skipped. Throws
/// IngestError("no valid interactions") when nothing parses.
ParseReport parse_reviews(std::istream& source);

/// Writes one JSON object per interaction, in the same schema parse_reviews reads.
void write_reviews(std::ostream& out, std::span<const Interaction> data);

/// Drops repeated (user, item, timestamp, text) records, keeping the first.
std::vector<Interaction> deduplicate(std::span<const Interaction> data);

/// Iteratively removes users and items with fewer than k interactions.
std::vector<Interaction> k_core_filter(std::span<const Interaction> data, int k);

struct SplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
  std::size_t pruned_validation = 0;
  std::size_t pruned_test = 0;
};

struct DatasetSplit {
  std::vector<Interaction> train;
  std::vector<Interaction> validation;
  std::vector<Interaction> test;
  std::map<std::string, int> user_index;
  std::map<std::string, int> item_index;
  std::uint64_t seed = 0;
  SplitCounts counts;

  int n_users() const { return static_cast<int>(user_index.size()); }
  int n_items() const { return static_cast<int>(item_index.size()); }

  /// Dense-id ratings of one partition. Every id must be indexed.
  std::vector<Rating> ratings(std::span<const Interaction> part) const;
};

/// 80/10/10 uniform random assignment (shuffle by seed), then drops
/// validation/test records whose user or item never occurs in train.
/// Partitions keep input order; dense ids follow lexicographic id order.
DatasetSplit split_dataset(std::span<const Interaction> data, std::uint64_t seed);

/// Persists train.jsonl, validation.jsonl, test.jsonl and index.json.
void save_split(const DatasetSplit& split, const std::string& dir);
DatasetSplit load_split(const std::string& dir);

}  // namespace ldalfm
