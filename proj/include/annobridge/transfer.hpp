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

#ifndef ANNOBRIDGE_TRANSFER_HPP_
#define ANNOBRIDGE_TRANSFER_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "annobridge/gateway.hpp"
#include "annobridge/record.hpp"

namespace annobridge {

enum class OccurrencePolicy {
  OrderedCursor,  // the k-th identical needle binds the k-th occurrence
  Leftmost,       // every needle binds its leftmost occurrence
};

struct TransferConfig {
  double fuzzy_threshold = 0.25;  // max normalized edit distance
  bool fuzzy_enabled = true;
  OccurrencePolicy occurrence_policy = OccurrencePolicy::OrderedCursor;
};

enum class MatchMethod { Exact, Fuzzy };

struct ResolvedSpan {
  CharSpan span;
  MatchMethod method = MatchMethod::Exact;
  std::optional<double> fuzzy_score;
  bool overlaps = false;  // shares code points with another resolved span
};

struct UnresolvedSpan {
  std::string span_id;
  std::string label;
  std::string needle;
  std::string reason;
  std::optional<double> best_score;
};

struct Resolution {
  std::vector<ResolvedSpan> resolved;
  std::vector<UnresolvedSpan> unresolved;
};

// Leftmost occurrence of `needle` starting at or after code point `cursor`.
// The returned span carries only bounds and surface.
std::optional<CharSpan> locate_exact(std::string_view haystack, std::string_view needle,
                                     std::size_t cursor = 0);

std::size_t levenshtein(std::u32string_view a, std::u32string_view b);
std::size_t levenshtein(std::string_view a, std::string_view b);

struct FuzzyMatch {
  CharSpan span;
  double score = 0.0;
};

// Best word-boundary-aligned window whose length is within
// ceil(threshold * |needle|) of |needle|, scored by
// levenshtein / max(|window|, |needle|). Ties go to the leftmost, then the
// shortest window. Returns nullopt when the best score exceeds `threshold`.
std::optional<FuzzyMatch> fuzzy_locate(std::string_view haystack, std::string_view needle,
                                       double threshold, std::size_t cursor = 0);

// Same search without the acceptance cut, for diagnostics.
std::optional<FuzzyMatch> best_fuzzy_window(std::string_view haystack,
                                            std::string_view needle, double threshold,
                                            std::size_t cursor = 0);

// Binds each raw surface to an interval of r.text_rus: a word-aligned exact
// occurrence first, then the fuzzy fallback when enabled, then an exact
// occurrence inside a word. Never throws for unmatched spans; they land in
// `unresolved`.
Resolution resolve_spans(const SentenceRecord& r, const std::vector<RawRusSpan>& raws,
                         const TransferConfig& cfg);

struct PromptSet {
  PromptTemplate transfer = default_template(PromptKind::TransferSpans);
  std::optional<PromptTemplate> translate;
};

struct TransferOutcome {
  SentenceRecord record;
  std::vector<UnresolvedSpan> unresolved;
  int attempts = 0;            // transfer request attempts
  int translate_attempts = 0;  // 0 when text_rus was already present
};

// Fills text_rus via the translate prompt when asked and absent.
SentenceRecord translate_record(const SentenceRecord& r, ChatTransport& transport,
                                const PromptTemplate& translate, RetryPolicy policy,
                                int* attempts = nullptr);

// render_prompt -> chat -> extract_json -> validate_transfer_response ->
// resolve_spans. spans_rus of the result holds the resolved spans. Throws
// Exhausted, MissingField.
TransferOutcome transfer_record(const SentenceRecord& r, ChatTransport& transport,
                                const PromptSet& prompts, const TransferConfig& cfg,
                                RetryPolicy policy);

}  // namespace annobridge

#endif  // ANNOBRIDGE_TRANSFER_HPP_
