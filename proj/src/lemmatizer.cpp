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

#include <string>

namespace ldalfm {

namespace {

// Irregular forms, table version 1.
constexpr std::pair<const char*, const char*> kIrregular[] = {
    {"children", "child"}, {"men", "man"},         {"women", "woman"},     {"people", "person"},
    {"feet", "foot"},      {"teeth", "tooth"},     {"mice", "mouse"},      {"geese", "goose"},
    {"knives", "knife"},   {"wives", "wife"},      {"lives", "life"},      {"leaves", "leaf"},
    {"halves", "half"},    {"shelves", "shelf"},   {"wolves", "wolf"},     {"better", "good"},
    {"best", "good"},      {"worse", "bad"},       {"worst", "bad"},       {"went", "go"},
    {"gone", "go"},        {"goes", "go"},         {"bought", "buy"},      {"brought", "bring"},
    {"thought", "think"},  {"made", "make"},       {"said", "say"},        {"got", "get"},
    {"gotten", "get"},     {"took", "take"},       {"taken", "take"},      {"came", "come"},
    {"gave", "give"},      {"given", "give"},      {"found", "find"},      {"told", "tell"},
    {"felt", "feel"},      {"kept", "keep"},       {"left", "leave"},      {"held", "hold"},
    {"ran", "run"},        {"wrote", "write"},     {"written", "write"},   {"sent", "send"},
    {"spent", "spend"},    {"built", "build"},     {"broke", "break"},     {"broken", "break"},
    {"wore", "wear"},      {"worn", "wear"},       {"ate", "eat"},         {"eaten", "eat"},
    {"saw", "see"},        {"seen", "see"},        {"knew", "know"},       {"known", "know"},
    {"began", "begin"},    {"begun", "begin"},     {"chose", "choose"},    {"chosen", "choose"},
    {"fell", "fall"},      {"fallen", "fall"},     {"grew", "grow"},       {"grown", "grow"},
    {"drove", "drive"},    {"driven", "drive"},    {"sold", "sell"},       {"paid", "pay"},
    {"used", "use"},       {"using", "use"},       {"done", "do"},         {"dies", "die"},
    {"ties", "tie"},       {"lies", "lie"},        {"taught", "teach"},    {"caught", "catch"},
    {"stood", "stand"},    {"understood", "understand"},                  {"sang", "sing"},
    {"sung", "sing"},      {"won", "win"},         {"lost", "lose"},       {"met", "meet"},
    {"led", "lead"},       {"fed", "feed"},        {"hid", "hide"},        {"hidden", "hide"},
};

// Forms the suffix rules would damage.
constexpr const char* kInvariant[] = {
    "always",   "perhaps",  "various",  "previous", "serious",   "news",     "series",
    "species",  "lens",     "yes",      "gas",      "bus",       "plus",     "thus",
    "less",     "unless",   "pants",    "jeans",    "shorts",    "scissors", "thing",
    "nothing",  "something", "anything", "everything", "morning", "evening", "string",
    "spring",   "ceiling",  "clothing", "building", "wedding",   "bedding",  "king",
    "ring",     "sing",     "wing",     "bring",    "during",    "hundred",  "bed",
    "red",      "need",     "speed",    "feed",     "seed",      "bleed",    "indeed",
    "shed",     "sled",     "wed",      "awesome",  "gorgeous",  "delicious", "famous",
    "nervous",  "obvious",  "tremendous", "enormous", "generous", "dangerous", "process",
    "success",  "across",   "bias",     "canvas",   "chaos",     "atlas",    "iris",
};

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool has_vowel(std::string_view s) {
  for (char c : s) {
    if (is_vowel(c) || c == 'y') return true;
  }
  return false;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Stem left after removing -ing / -ed.
std::string repair_stem(std::string stem) {
  const std::size_t n = stem.size();
  if (n >= 2 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) && stem[n - 1] != 'l' &&
      stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();
    return stem;
  }
  if (n == 3 && !is_vowel(stem[0]) && is_vowel(stem[1]) && !is_vowel(stem[2]) &&
      stem[2] != 'w' && stem[2] != 'x' && stem[2] != 'y') {
    stem.push_back('e');
  }
  return stem;
}

}  // namespace

Lemmatizer::Lemmatizer() {
  for (const auto& [form, lemma] : kIrregular) irregular_.emplace(form, lemma);
  for (const char* word : kInvariant) invariant_.emplace(word);
}

std::string Lemmatizer::operator()(std::string_view token) const {
  std::string word(token);
  if (auto it = irregular_.find(word); it != irregular_.end()) return it->second;
  if (invariant_.count(word)) return word;
  std::string lemma = apply_rules(word);
  return lemma.size() >= 3 ? lemma : word;
}

std::string Lemmatizer::apply_rules(const std::string& word) {
  const std::size_t n = word.size();

  if (ends_with(word, "ies") && n > 4) return word.substr(0, n - 3) + "y";
  if (ends_with(word, "sses")) return word.substr(0, n - 2);
  if (ends_with(word, "xes") || ends_with(word, "ches") || ends_with(word, "shes") ||
      ends_with(word, "zzes")) {
    return word.substr(0, n - 2);
  }
  if (ends_with(word, "s") && n > 3) {
    const char prev = word[n - 2];
    if (prev != 's' && prev != 'u' && prev != 'i') return word.substr(0, n - 1);
    return word;
  }
  if (ends_with(word, "ing") && n >= 6) {
    std::string stem = word.substr(0, n - 3);
    if (has_vowel(stem)) return repair_stem(std::move(stem));
    return word;
  }
  if (ends_with(word, "ied") && n > 4) return word.substr(0, n - 3) + "y";
  if (ends_with(word, "ed") && n >= 5 && !ends_with(word, "eed")) {
    std::string stem = word.substr(0, n - 2);
    if (has_vowel(stem)) return repair_stem(std::move(stem));
  }
  return word;
}

}  // namespace ldalfm
