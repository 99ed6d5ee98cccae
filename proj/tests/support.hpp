// Copyright 2026 The AnnoBridge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Shared generators and helpers for the unit and acceptance tests.

#ifndef ANNOBRIDGE_TESTS_SUPPORT_HPP_
#define ANNOBRIDGE_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "annobridge/corpus.hpp"
#include "annobridge/record.hpp"
#include "annobridge/utf8.hpp"

namespace annobridge::testing {

inline const std::vector<std::string> kLabels = {
    "Term",      "Definition",      "Alias-Term",   "Secondary-Definition",
    "Qualifier", "Referential-Term", "Ordered-Term", "Definition-frag"};

// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() /
            ("annobridge-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string random_word(std::mt19937_64& rng, const std::u32string& alphabet,
                               std::size_t min_len, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::u32string w;
  for (std::size_t i = 0, n = len(rng); i < n; ++i) w.push_back(alphabet[pick(rng)]);
  return utf8::encode(w);
}

inline const std::u32string kLatin = U"abcdefghijklmnopqrstuvwxyz";
inline const std::u32string kCyrillic = U"абвгдежзийклмнопрстуфхцчшщыэюя";

// A BIO-valid sentence of 1..30 tokens. Tokens mix Latin, Cyrillic and
// punctuation; offsets follow single-space joining.
inline ConllSentence random_valid_sentence(std::mt19937_64& rng, std::size_t ordinal) {
  ConllSentence s;
  s.sentence_id = "rand.deft:" + std::to_string(ordinal);
  std::uniform_int_distribution<int> n_tokens(1, 30);
  std::uniform_int_distribution<int> coin(0, 99);
  std::uniform_int_distribution<std::size_t> label(0, kLabels.size() - 1);
  std::string open;  // label of the entity continuing into the next token
  std::size_t offset = 0;
  for (int i = 0, n = n_tokens(rng); i < n; ++i) {
    TokenRow row;
    const int kind = coin(rng);
    row.token = kind < 10   ? std::string(1, ",.;:()"[coin(rng) % 6])
                : kind < 50 ? random_word(rng, kCyrillic, 1, 9)
                            : random_word(rng, kLatin, 1, 9);
    row.source_file = "rand.txt";
    row.start_char = offset;
    row.end_char = offset + utf8::length(row.token);
    offset = row.end_char + 1;
    const int t = coin(rng);
    if (!open.empty() && t < 45) {
      row.tag = "I-" + open;
    } else if (t < 75) {
      open = kLabels[label(rng)];
      row.tag = "B-" + open;
    } else {
      open.clear();
      row.tag = "O";
    }
    s.rows.push_back(std::move(row));
  }
  return s;
}

// Parallel EN/RU gold records. Every word of a sentence is distinct and all
// words of one language share a length, so a span surface occurs exactly
// once in its text and never inside another word. Each record carries 1..3
// non-overlapping spans in left-to-right order on both sides.
inline std::vector<SentenceRecord> synthetic_gold_set(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto unique_words = [&](const std::u32string& alphabet, std::size_t count) {
    std::set<std::string> seen;
    std::vector<std::string> out;
    while (out.size() < count) {
      std::string w = random_word(rng, alphabet, 7, 7);
      if (seen.insert(w).second) out.push_back(w);
    }
    return out;
  };
  const auto en_vocab = unique_words(kLatin, 4000);
  const auto ru_vocab = unique_words(kCyrillic, 4000);

  std::vector<SentenceRecord> out;
  std::uniform_int_distribution<int> n_words(6, 18);
  std::uniform_int_distribution<int> n_spans(1, 3);
  std::uniform_int_distribution<std::size_t> label(0, kLabels.size() - 1);
  for (std::size_t k = 0; k < n; ++k) {
    const int words = n_words(rng);
    std::vector<std::size_t> idx(en_vocab.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(words));

    // Split the word positions into slots; each span takes one slot.
    const int spans = std::min(n_spans(rng), words / 2);
    std::vector<int> cuts;
    for (int i = 1; i < words; ++i) cuts.push_back(i);
    std::shuffle(cuts.begin(), cuts.end(), rng);
    cuts.resize(static_cast<std::size_t>(2 * spans));
    std::sort(cuts.begin(), cuts.end());

    auto build = [&](const std::vector<std::string>& vocab, std::vector<CharSpan>& spans_out,
                     std::vector<std::string>& labels, bool assign_labels) {
      std::vector<std::size_t> starts;
      std::string text;
      for (int i = 0; i < words; ++i) {
        if (i) text += ' ';
        starts.push_back(utf8::length(text));
        text += vocab[idx[static_cast<std::size_t>(i)]];
      }
      for (int s = 0; s < spans; ++s) {
        const auto a = static_cast<std::size_t>(cuts[2 * s]);
        const auto b = static_cast<std::size_t>(cuts[2 * s + 1]);
        CharSpan span;
        span.start = starts[a];
        span.end = starts[b - 1] + 7;
        if (assign_labels) labels.push_back(kLabels[label(rng)]);
        span.label = labels[static_cast<std::size_t>(s)];
        span.span_id = "T" + std::to_string(s + 1);
        span.surface = utf8::slice(text, span.start, span.end);
        spans_out.push_back(std::move(span));
      }
      return text;
    };
    SentenceRecord r;
    r.id = "synthetic_" + std::to_string(k / 100) + ".deft:" + std::to_string(k % 100);
    std::vector<std::string> labels;
    r.text = build(en_vocab, r.spans, labels, true);
    std::vector<CharSpan> rus;
    r.text_rus = build(ru_vocab, rus, labels, false);
    r.spans_rus = std::move(rus);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace annobridge::testing

#endif  // ANNOBRIDGE_TESTS_SUPPORT_HPP_
