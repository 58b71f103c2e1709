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

#include "ldalfm/textprep.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ldalfm/rng.hpp"

namespace ldalfm {

namespace {

bool is_ascii_alnum(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

// Length in bytes of a Unicode whitespace sequence starting at s[pos], or 0.
std::size_t unicode_space_at(std::string_view s, std::size_t pos) {
  const auto c = static_cast<unsigned char>(s[pos]);
  if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') return 1;
  auto byte = [&](std::size_t k) -> unsigned char {
    return pos + k < s.size() ? static_cast<unsigned char>(s[pos + k]) : 0;
  };
  if (c == 0xC2 && (byte(1) == 0xA0 || byte(1) == 0x85)) return 2;  // NBSP, NEL
  if (c == 0xE2 && byte(1) == 0x80 &&
      ((byte(2) >= 0x80 && byte(2) <= 0x8B) || byte(2) == 0xA8 || byte(2) == 0xA9 ||
       byte(2) == 0xAF)) {
    return 3;  // U+2000..U+200B, line/paragraph separators, narrow NBSP
  }
  if (c == 0xE3 && byte(1) == 0x80 && byte(2) == 0x80) return 3;  // ideographic space
  return 0;
}

// Length of a U+2010..U+205F general-punctuation character at s[pos], or 0.
std::size_t unicode_punct_at(std::string_view s, std::size_t pos) {
  if (pos + 2 >= s.size()) return 0;
  const auto b0 = static_cast<unsigned char>(s[pos]);
  const auto b1 = static_cast<unsigned char>(s[pos + 1]);
  const auto b2 = static_cast<unsigned char>(s[pos + 2]);
  if (b0 == 0xE2 && ((b1 == 0x80 && b2 >= 0x90) || (b1 == 0x81 && b2 <= 0x9F))) return 3;
  return 0;
}

bool is_word_byte(std::string_view s, std::size_t pos) {
  const auto c = static_cast<unsigned char>(s[pos]);
  if (c < 0x80) return is_ascii_alnum(c) || c == '\'';
  return unicode_space_at(s, pos) == 0 && unicode_punct_at(s, pos) == 0;
}

// Keeps ASCII letters and non-ASCII characters other than general punctuation.
std::string strip_non_letters(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  for (std::size_t pos = 0; pos < token.size();) {
    const auto c = static_cast<unsigned char>(token[pos]);
    if (c < 0x80) {
      if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) out.push_back(static_cast<char>(c));
      ++pos;
      continue;
    }
    if (std::size_t skip = unicode_punct_at(token, pos)) {
      pos += skip;
      continue;
    }
    out.push_back(static_cast<char>(c));
    ++pos;
  }
  return out;
}

// Number of code points, so "é" counts as one character.
std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view raw) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < raw.size()) {
    if (std::size_t skip = unicode_space_at(raw, pos)) {
      pos += skip;
      continue;
    }
    if (is_word_byte(raw, pos)) {
      const std::size_t start = pos;
      while (pos < raw.size() && is_word_byte(raw, pos)) ++pos;
      tokens.emplace_back(raw.substr(start, pos - start));
      continue;
    }
    const std::size_t len = std::max<std::size_t>(1, unicode_punct_at(raw, pos));
    tokens.emplace_back(raw.substr(pos, len));
    pos += len;
  }
  return tokens;
}

std::vector<std::string> preprocess_text(std::string_view raw, const StopwordSet& stopwords,
                                         const LemmaFn& lemmatizer) {
  std::vector<std::string> out;
  for (std::string token : tokenize(raw)) {
    for (char& c : token) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    if (utf8_length(token) <= 1 || stopwords.count(token)) continue;
    std::string cleaned = strip_non_letters(token);
    if (cleaned.empty()) continue;
    out.push_back(lemmatizer(cleaned));
  }
  return out;
}

TextPipeline::TextPipeline() : TextPipeline(english_stopwords(), Lemmatizer()) {}

TextPipeline::TextPipeline(StopwordSet stopwords, LemmaFn lemmatizer)
    : stopwords_(std::move(stopwords)), lemmatizer_(std::move(lemmatizer)) {}

std::vector<std::string> TextPipeline::operator()(std::string_view raw) const {
  return preprocess_text(raw, stopwords_, lemmatizer_);
}

int Vocabulary::find(std::string_view token) const {
  auto it = index.find(std::string(token));
  return it == index.end() ? -1 : it->second;
}

std::uint64_t Vocabulary::fingerprint() const {
  std::string joined;
  for (const auto& t : tokens) {
    joined += t;
    joined += '\n';
  }
  return fnv1a(joined);
}

Vocabulary build_vocabulary(std::span<const std::vector<std::string>> train_docs, int max_size) {
  if (max_size < 1) throw std::invalid_argument("build_vocabulary: size must be >= 1");
  std::map<std::string, std::size_t> freq;
  for (const auto& doc : train_docs) {
    for (const auto& t : doc) ++freq[t];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary vocab;
  const std::size_t keep = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(max_size));
  for (std::size_t r = 0; r < keep; ++r) {
    vocab.index.emplace(ranked[r].first, static_cast<int>(r));
    vocab.tokens.push_back(std::move(ranked[r].first));
  }
  return vocab;
}

std::size_t Corpus::total_words() const {
  return std::accumulate(documents.begin(), documents.end(), std::size_t{0},
                         [](std::size_t acc, const ItemDocument& d) { return acc + d.words.size(); });
}

std::vector<ItemDocument> aggregate_item_documents(const DatasetSplit& split,
                                                   const Vocabulary& vocab,
                                                   const TextPipeline& pipeline) {
  std::vector<ItemDocument> docs(static_cast<std::size_t>(split.n_items()));
  for (std::size_t d = 0; d < docs.size(); ++d) docs[d].item = static_cast<int>(d);

  std::vector<std::size_t> order(split.train.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return split.train[a].timestamp < split.train[b].timestamp;
  });
  for (std::size_t n : order) {
    const auto& rec = split.train[n];
    auto& doc = docs[static_cast<std::size_t>(split.item_index.at(rec.item_id))];
    ++doc.source_review_count;
    for (const auto& token : pipeline(rec.review_text)) {
      if (int w = vocab.find(token); w >= 0) doc.words.push_back(w);
    }
  }
  return docs;
}

Corpus build_corpus(const DatasetSplit& split, int vocab_size, const TextPipeline& pipeline) {
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(split.train.size());
  for (const auto& rec : split.train) tokens.push_back(pipeline(rec.review_text));
  Corpus corpus;
  corpus.vocabulary = build_vocabulary(tokens, vocab_size);
  corpus.documents = aggregate_item_documents(split, corpus.vocabulary, pipeline);
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream vocab(fs::path(dir) / "vocab.txt", std::ios::binary);
  for (const auto& t : corpus.vocabulary.tokens) vocab << t << '\n';
  std::ofstream docs(fs::path(dir) / "documents.txt", std::ios::binary);
  for (const auto& d : corpus.documents) {
    docs << d.item;
    for (int w : d.words) docs << ' ' << w;
    docs << '\n';
  }
  if (!vocab || !docs) throw std::runtime_error("cannot write corpus to " + dir);
}

Corpus load_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  Corpus corpus;
  std::ifstream vocab(fs::path(dir) / "vocab.txt");
  if (!vocab) throw std::runtime_error("cannot open " + (fs::path(dir) / "vocab.txt").string());
  std::string line;
  while (std::getline(vocab, line)) {
    corpus.vocabulary.index.emplace(line, corpus.vocabulary.size());
    corpus.vocabulary.tokens.push_back(line);
  }
  std::ifstream docs(fs::path(dir) / "documents.txt");
  if (!docs) throw std::runtime_error("cannot open " + (fs::path(dir) / "documents.txt").string());
  while (std::getline(docs, line)) {
    std::istringstream fields(line);
    ItemDocument doc;
    fields >> doc.item;
    int w = 0;
    while (fields >> w) {
      if (w < 0 || w >= corpus.vocab_size()) {
        throw std::runtime_error("documents.txt: word index " + std::to_string(w) +
                                 " outside vocabulary of size " +
                                 std::to_string(corpus.vocab_size()));
      }
      doc.words.push_back(w);
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace ldalfm
