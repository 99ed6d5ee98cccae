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

#ifndef ANNOBRIDGE_CORPUS_HPP_
#define ANNOBRIDGE_CORPUS_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "annobridge/record.hpp"

namespace annobridge {

// One line of a CoNLL-like corpus file: token, source, start, end, tag, and
// any trailing columns (relation annotation) carried verbatim.
struct TokenRow {
  std::string token;
  std::string source_file;
  std::size_t start_char = 0;
  std::size_t end_char = 0;
  std::string tag;
  std::vector<std::string> extra_cols;

  bool operator==(const TokenRow&) const = default;
};

struct ConllSentence {
  std::string sentence_id;
  std::vector<TokenRow> rows;

  bool operator==(const ConllSentence&) const = default;
};

enum class BioViolationKind { IStart, LabelSwitchWithoutB, MalformedTag };

std::string_view to_string(BioViolationKind kind);

struct BioViolation {
  std::string sentence_id;
  std::size_t row_index = 0;
  BioViolationKind kind = BioViolationKind::MalformedTag;

  bool operator==(const BioViolation&) const = default;
};

struct BioTag {
  char prefix = 'O';  // 'O', 'B' or 'I'
  std::string label;
};

// Parses "O", "B-<label>" or "I-<label>". Anything else yields nullopt.
std::optional<BioTag> parse_tag(std::string_view tag);

// Reads a tab-separated corpus. Blank lines delimit sentences; fields are
// trimmed. Throws IoError or FormatError (with the 1-based line number).
std::vector<ConllSentence> parse_conll(const std::filesystem::path& path);
std::vector<ConllSentence> parse_conll(std::istream& in,
                                       const std::string& source_name);

void write_conll(std::ostream& out, const std::vector<ConllSentence>& sentences);

std::vector<BioViolation> validate_bio(const ConllSentence& s);

// Rewrites each offending I- tag to B- of the same label. Malformed tags
// become "O".
ConllSentence repair_bio(const ConllSentence& s);

// Joins tokens with single spaces and derives spans from maximal B/I runs.
// Span ids are "T1", "T2", ... in order of appearance. Throws InvalidBio.
SentenceRecord conll_to_record(const ConllSentence& s);

// Whitespace-tokenizes the chosen side and tags each token intersecting a
// span. Tokens straddling a span boundary are split at that boundary.
// Throws OverlappingSpans, MissingField when the side is absent.
ConllSentence record_to_bio(const SentenceRecord& r, Side which);

struct DuplicateGroup {
  std::string text;
  std::vector<std::string> ids;  // sorted
  bool annotation_conflict = false;

  bool operator==(const DuplicateGroup&) const = default;
};

// Groups records with identical text (outer whitespace trimmed). Groups are
// sorted by text, so the result does not depend on input order.
std::vector<DuplicateGroup> detect_duplicates(
    const std::vector<SentenceRecord>& ds);

// Sum of (group size - 1).
std::size_t duplicate_count(const std::vector<DuplicateGroup>& groups);

struct LabelStats {
  std::map<std::string, std::size_t> counts;
  std::size_t sentences = 0;
  std::size_t spans = 0;

  std::size_t count(const std::string& label) const {
    auto it = counts.find(label);
    return it == counts.end() ? 0 : it->second;
  }
  bool operator==(const LabelStats&) const = default;
};

LabelStats entity_stats(const std::vector<SentenceRecord>& ds, Side which);

// Aligned text table with one column per named stats block.
std::string format_stats_table(
    const std::vector<std::pair<std::string, LabelStats>>& columns);
Json stats_to_json(const LabelStats& stats);

}  // namespace annobridge

#endif  // ANNOBRIDGE_CORPUS_HPP_
