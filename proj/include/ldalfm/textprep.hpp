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
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ldalfm/ingest.hpp"

namespace ldalfm {

using StopwordSet = std::unordered_set<std::string>;
using LemmaFn = std::function<std::string(std::string_view)>;

/// Bundled English stopword list (179 entries). The same list ships as
/// data/stopwords_en.txt; kStopwordListHash is FNV-1a over that file.
const std::vector<std::string_view>& english_stopword_list();
StopwordSet english_stopwords();
inline constexpr std::uint64_t kStopwordListHash = 0x02024cde651fbd52ULL;

/// Dictionary-plus-rules English lemmatizer for lowercase ASCII tokens.
///
/// Irregular forms come from a bundled table (version kTableVersion). Other
/// tokens go through suffix rules, first match wins:
///   -ies -> -y, -sses -> -ss, -(x|ch|sh|zz)es -> drop "es", -s -> drop "s"
///   (not after s, u or i), -ing / -ed -> drop, then undouble a final
///   doubled consonant or restore a silent e after a short CVC stem.
/// Stems shorter than three letters are never produced.
class Lemmatizer {
 public:
  static constexpr int kTableVersion = 1;

  Lemmatizer();
  std::string operator()(std::string_view token) const;

 private:
  static std::string apply_rules(const std::string& word);

  std::unordered_map<std::string, std::string> irregular_;
  std::unordered_set<std::string> invariant_;
};

/// Tokenize, lowercase, drop stopwords and one-character tokens, strip
/// non-letters (dropping tokens that become empty), lemmatize. In that order.
std::vector<std::string> preprocess_text(std::string_view raw, const StopwordSet& stopwords,
                                         const LemmaFn& lemmatizer);

/// Tokenizer used by the first stage: word runs (letters, digits, apostrophes,
/// non-ASCII letters) are tokens; every other visible character is its own token.
std::vector<std::string> tokenize(std::string_view raw);

/// preprocess_text bound to the bundled stopwords and lemmatizer.
class TextPipeline {
 public:
  TextPipeline();
  TextPipeline(StopwordSet stopwords, LemmaFn lemmatizer);
  std::vector<std::string> operator()(std::string_view raw) const;

 private:
  StopwordSet stopwords_;
  LemmaFn lemmatizer_;
};

struct Vocabulary {
  std::vector<std::string> tokens;
  std::unordered_map<std::string, int> index;

  int size() const { return static_cast<int>(tokens.size()); }
  /// -1 when out of vocabulary.
  int find(std::string_view token) const;
  /// FNV-1a over the newline-joined token list; identifies a vocabulary in checkpoints.
  std::uint64_t fingerprint() const;
};

/// Keeps the max_size most frequent tokens; ties break lexicographically.
Vocabulary build_vocabulary(std::span<const std::vector<std::string>> train_docs, int max_size);

struct ItemDocument {
  int item = 0;
  std::vector<int> words;
  int source_review_count = 0;
};

/// The topic-model corpus: one document per train item, document d is item d.
struct Corpus {
  Vocabulary vocabulary;
  std::vector<ItemDocument> documents;

  int vocab_size() const { return vocabulary.size(); }
  std::size_t total_words() const;
};

/// Concatenates each train item's reviews (timestamp order, stable) over the
/// vocabulary. Items with no in-vocabulary tokens get an empty document.
std::vector<ItemDocument> aggregate_item_documents(const DatasetSplit& split,
                                                   const Vocabulary& vocab,
                                                   const TextPipeline& pipeline);

/// Full corpus construction from a split's train partition.
Corpus build_corpus(const DatasetSplit& split, int vocab_size, const TextPipeline& pipeline);

/// vocab.txt (one token per line, rank order) and documents.txt
/// ("<item> <w1> <w2> ..." per line).
void save_corpus(const Corpus& corpus, const std::string& dir);
Corpus load_corpus(const std::string& dir);

}  // namespace ldalfm
