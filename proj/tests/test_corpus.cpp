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

#include <random>
#include <sstream>

#include "annobridge/corpus.hpp"
#include "annobridge/error.hpp"
#include "annobridge/jsonl.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace annobridge;

namespace {

const std::filesystem::path kMini = std::filesystem::path(ANNOBRIDGE_FIXTURES) / "deft_mini";

ConllSentence sentence(std::vector<std::pair<std::string, std::string>> tokens) {
  ConllSentence s;
  s.sentence_id = "doc.deft:0";
  std::size_t off = 0;
  for (auto& [tok, tag] : tokens) {
    TokenRow r;
    r.token = tok;
    r.source_file = "doc.txt";
    r.start_char = off;
    r.end_char = off + utf8::length(tok);
    r.tag = tag;
    off = r.end_char + 1;
    s.rows.push_back(r);
  }
  return s;
}

std::vector<std::string> tags(const ConllSentence& s) {
  std::vector<std::string> out;
  for (const auto& r : s.rows) out.push_back(r.tag);
  return out;
}

}  // namespace

TEST_CASE("parse_conll reads DEFT rows with padded fields") {
  const auto s = parse_conll(kMini / "t1_biology_0_0.deft");
  REQUIRE(s.size() == 2);
  CHECK(s[0].sentence_id == "t1_biology_0_0.deft:0");
  CHECK(s[1].sentence_id == "t1_biology_0_0.deft:1");
  REQUIRE(s[0].rows.size() == 8);
  CHECK(s[0].rows[0].token == "Mitosis");
  CHECK(s[0].rows[0].source_file == "data/source_txt/t1_biology_0_0.txt");
  CHECK(s[0].rows[0].start_char == 0);
  CHECK(s[0].rows[0].end_char == 7);
  CHECK(s[0].rows[0].tag == "B-Term");
  CHECK(s[0].rows[0].extra_cols == std::vector<std::string>{"-1", "0", "0"});
}

TEST_CASE("parse_conll reports the offending line") {
  std::istringstream in("a\tf\t0\t1\tO\n\nb\tf\t2\n");
  try {
    parse_conll(in, "bad.deft");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("bad.deft") != std::string::npos);
  }
  std::istringstream offsets("a\tf\tx\t1\tO\n");
  CHECK_THROWS_AS(parse_conll(offsets, "x"), FormatError);
  std::istringstream empty_span("a\tf\t3\t3\tO\n");
  CHECK_THROWS_AS(parse_conll(empty_span, "x"), FormatError);
}

TEST_CASE("write_conll output parses back to the same sentences") {
  const auto s = parse_conll(kMini / "t1_biology_0_1.deft");
  std::ostringstream out;
  write_conll(out, s);
  std::istringstream in(out.str());
  CHECK(parse_conll(in, "t1_biology_0_1.deft") == s);
}

TEST_CASE("parse_tag") {
  CHECK(parse_tag("O")->prefix == 'O');
  CHECK(parse_tag("B-Alias-Term")->label == "Alias-Term");
  CHECK(parse_tag("I-Term")->prefix == 'I');
  CHECK_FALSE(parse_tag("X-Term"));
  CHECK_FALSE(parse_tag("B-"));
  CHECK_FALSE(parse_tag(""));
}

TEST_CASE("validate_bio flags each violation kind") {
  const auto s = sentence({{"a", "I-Term"},
                           {"b", "I-Term"},
                           {"c", "I-Definition"},
                           {"d", "O"},
                           {"e", "Z-Term"},
                           {"f", "B-Term"},
                           {"g", "I-Term"}});
  const auto v = validate_bio(s);
  REQUIRE(v.size() == 3);
  CHECK(v[0] == BioViolation{"doc.deft:0", 0, BioViolationKind::IStart});
  CHECK(v[1] == BioViolation{"doc.deft:0", 2, BioViolationKind::LabelSwitchWithoutB});
  CHECK(v[2] == BioViolation{"doc.deft:0", 4, BioViolationKind::MalformedTag});

  const auto fixed = repair_bio(s);
  CHECK(tags(fixed) == std::vector<std::string>{"B-Term", "I-Term", "B-Definition", "O", "O",
                                                "B-Term", "I-Term"});
  CHECK(validate_bio(fixed).empty());
}

TEST_CASE("conll_to_record joins tokens and converts tag runs to spans") {
  const auto s = sentence({{"Митоз", "B-Term"},
                           {"—", "O"},
                           {"деление", "B-Definition"},
                           {"ядра", "I-Definition"},
                           {".", "O"}});
  const auto r = conll_to_record(s);
  CHECK(r.id == "doc.deft:0");
  CHECK(r.text == "Митоз — деление ядра .");
  REQUIRE(r.spans.size() == 2);
  CHECK(r.spans[0] == CharSpan{0, 5, "Term", "T1", "Митоз"});
  CHECK(r.spans[1] == CharSpan{8, 20, "Definition", "T2", "деление ядра"});
  CHECK(r.has_definition());
  CHECK_FALSE(conll_to_record(sentence({{"x", "O"}})).has_definition());
}

TEST_CASE("record_to_bio splits tokens at span boundaries") {
  SentenceRecord r;
  r.id = "doc.deft:3";
  r.text = "cells (plural) divide";
  r.spans = {{7, 13, "Term", "T1", "plural"}};
  const auto s = record_to_bio(r, Side::Source);
  std::vector<std::string> toks;
  for (const auto& row : s.rows) toks.push_back(row.token);
  CHECK(toks == std::vector<std::string>{"cells", "(", "plural", ")", "divide"});
  CHECK(tags(s) == std::vector<std::string>{"O", "O", "B-Term", "O", "O"});
  CHECK(conll_to_record(s).spans[0].surface == "plural");

  r.spans.push_back({9, 14, "Term", "T2", "ural)"});
  CHECK_THROWS_AS(record_to_bio(r, Side::Source), OverlappingSpans);
  CHECK_THROWS_AS(record_to_bio(r, Side::Target), MissingField);
}

TEST_CASE("BIO round trip holds on random valid sentences") {
  std::mt19937_64 rng(7);
  for (std::size_t i = 0; i < 300; ++i) {
    const auto s = testing::random_valid_sentence(rng, i);
    REQUIRE(validate_bio(s).empty());
    const auto back = record_to_bio(conll_to_record(s), Side::Source);
    CHECK(tags(back) == tags(s));
  }
}

TEST_CASE("DEFT extra columns survive a source-side export") {
  const auto s = parse_conll(kMini / "t1_biology_0_0.deft");
  const auto r = conll_to_record(s[0]);
  const auto back = record_to_bio(record_from_json(record_to_json(r)), Side::Source);
  CHECK(back.rows == s[0].rows);
}

TEST_CASE("detect_duplicates groups exact copies and flags conflicts") {
  std::vector<SentenceRecord> records;
  for (const auto& f : {"t1_biology_0_0.deft", "t1_biology_0_1.deft"}) {
    for (const auto& s : parse_conll(kMini / f)) records.push_back(conll_to_record(repair_bio(s)));
  }
  const auto groups = detect_duplicates(records);
  REQUIRE(groups.size() == 2);
  CHECK(duplicate_count(groups) == 2);
  CHECK(groups[0].text == "Cells divide .");
  CHECK_FALSE(groups[0].annotation_conflict);
  CHECK(groups[1].ids ==
        std::vector<std::string>{"t1_biology_0_0.deft:0", "t1_biology_0_1.deft:1"});
  CHECK(groups[1].annotation_conflict);

  SentenceRecord a, b, c;
  a.id = "a";
  a.text = " same ";
  b.id = "b";
  b.text = "same";
  c.id = "c";
  c.text = "Same";
  const auto g = detect_duplicates({a, b, c});
  REQUIRE(g.size() == 1);
  CHECK(g[0].ids == std::vector<std::string>{"a", "b"});
  CHECK(duplicate_count(detect_duplicates({c})) == 0);
}

TEST_CASE("entity_stats and the statistics table") {
  std::vector<SentenceRecord> records;
  for (const auto& f : {"t1_biology_0_0.deft", "t1_biology_0_1.deft"}) {
    for (const auto& s : parse_conll(kMini / f)) records.push_back(conll_to_record(repair_bio(s)));
  }
  const auto stats = entity_stats(records, Side::Source);
  CHECK(stats.sentences == 5);
  CHECK(stats.spans == 4);
  CHECK(stats.count("Term") == 3);
  CHECK(stats.count("Definition") == 1);
  CHECK(stats.count("Qualifier") == 0);

  const auto table = format_stats_table({{"DEV", stats}});
  CHECK(table.find("Term") != std::string::npos);
  CHECK(table.find("DEV") != std::string::npos);
  const Json j = stats_to_json(stats);
  CHECK(j["labels"]["Term"] == 3);
  CHECK(j["spans"] == 4);

  // Target side reads spans_rus.
  SentenceRecord r = records[0];
  r.text_rus = "Митоз";
  r.spans_rus = std::vector<CharSpan>{{0, 5, "Alias-Term", "T1", "Митоз"}};
  CHECK(entity_stats({r}, Side::Target).count("Alias-Term") == 1);
}
