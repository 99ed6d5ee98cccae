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

#include "annobridge/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <tuple>

#include "annobridge/error.hpp"
#include "annobridge/utf8.hpp"

namespace annobridge {
namespace {

constexpr std::string_view kExtraKey = "conll_extra";

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::optional<std::size_t> parse_offset(std::string_view s) {
  std::size_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto tab = line.find('\t', pos);
    out.push_back(trim(line.substr(pos, tab - pos)));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  return out;
}

struct Token {
  std::size_t start;
  std::size_t end;
};

std::vector<Token> whitespace_tokens(std::u32string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && utf8::is_space(text[i])) ++i;
    if (i == text.size()) break;
    const std::size_t b = i;
    while (i < text.size() && !utf8::is_space(text[i])) ++i;
    out.push_back({b, i});
  }
  return out;
}

using SpanKey = std::tuple<std::size_t, std::size_t, std::string>;

std::vector<SpanKey> annotation_key(const SentenceRecord& r) {
  std::vector<SpanKey> key;
  key.reserve(r.spans.size());
  for (const auto& s : r.spans) key.emplace_back(s.start, s.end, s.label);
  std::sort(key.begin(), key.end());
  return key;
}

}  // namespace

std::string_view to_string(BioViolationKind kind) {
  switch (kind) {
    case BioViolationKind::IStart:
      return "IStart";
    case BioViolationKind::LabelSwitchWithoutB:
      return "LabelSwitchWithoutB";
    case BioViolationKind::MalformedTag:
      return "MalformedTag";
  }
  return "?";
}

std::optional<BioTag> parse_tag(std::string_view tag) {
  if (tag == "O") return BioTag{'O', {}};
  if (tag.size() < 3 || tag[1] != '-') return std::nullopt;
  if (tag[0] != 'B' && tag[0] != 'I') return std::nullopt;
  return BioTag{tag[0], std::string(tag.substr(2))};
}

std::vector<ConllSentence> parse_conll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_conll(in, path.string());
}

std::vector<ConllSentence> parse_conll(std::istream& in,
                                       const std::string& source_name) {
  const std::string stem = std::filesystem::path(source_name).filename().string();
  std::vector<ConllSentence> out;
  ConllSentence current;
  std::string line;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (current.rows.empty()) return;
    current.sentence_id = stem + ":" + std::to_string(out.size());
    out.push_back(std::move(current));
    current = ConllSentence{};
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      flush();
      continue;
    }
    const auto cols = split_tabs(line);
    if (cols.size() < 5) {
      throw FormatError(source_name, line_no,
                        "expected at least 5 tab-separated columns, got " +
                            std::to_string(cols.size()));
    }
    const auto start = parse_offset(cols[2]);
    const auto end = parse_offset(cols[3]);
    if (!start || !end) {
      throw FormatError(source_name, line_no, "non-integer character offset");
    }
    if (*start >= *end) {
      throw FormatError(source_name, line_no, "start offset not below end offset");
    }
    if (cols[0].empty()) {
      throw FormatError(source_name, line_no, "empty token");
    }
    if (!current.rows.empty() && *start < current.rows.back().start_char) {
      throw FormatError(source_name, line_no, "offsets decrease within sentence");
    }
    TokenRow row;
    row.token = std::string(cols[0]);
    row.source_file = std::string(cols[1]);
    row.start_char = *start;
    row.end_char = *end;
    row.tag = std::string(cols[4]);
    for (std::size_t i = 5; i < cols.size(); ++i) {
      row.extra_cols.emplace_back(cols[i]);
    }
    current.rows.push_back(std::move(row));
  }
  if (in.bad()) throw IoError("read failure on " + source_name);
  flush();
  return out;
}

void write_conll(std::ostream& out, const std::vector<ConllSentence>& sentences) {
  bool first = true;
  for (const auto& s : sentences) {
    if (!first) out << '\n';
    first = false;
    for (const auto& r : s.rows) {
      out << r.token << '\t' << r.source_file << '\t' << r.start_char << '\t'
          << r.end_char << '\t' << r.tag;
      for (const auto& c : r.extra_cols) out << '\t' << c;
      out << '\n';
    }
  }
}

std::vector<BioViolation> validate_bio(const ConllSentence& s) {
  std::vector<BioViolation> out;
  std::optional<std::string> open;  // label of the entity the previous row is in
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const auto tag = parse_tag(s.rows[i].tag);
    if (!tag) {
      out.push_back({s.sentence_id, i, BioViolationKind::MalformedTag});
      open.reset();
      continue;
    }
    switch (tag->prefix) {
      case 'O':
        open.reset();
        break;
      case 'B':
        open = tag->label;
        break;
      case 'I':
        if (!open) {
          out.push_back({s.sentence_id, i, BioViolationKind::IStart});
        } else if (*open != tag->label) {
          out.push_back({s.sentence_id, i, BioViolationKind::LabelSwitchWithoutB});
        }
        open = tag->label;
        break;
    }
  }
  return out;
}

ConllSentence repair_bio(const ConllSentence& s) {
  ConllSentence out = s;
  for (const auto& v : validate_bio(s)) {
    auto& tag = out.rows[v.row_index].tag;
    if (v.kind == BioViolationKind::MalformedTag) {
      tag = "O";
    } else {
      tag[0] = 'B';
    }
  }
  return out;
}

SentenceRecord conll_to_record(const ConllSentence& s) {
  if (const auto violations = validate_bio(s); !violations.empty()) {
    throw InvalidBio(s.sentence_id + ": row " +
                     std::to_string(violations.front().row_index) + " " +
                     std::string(to_string(violations.front().kind)));
  }
  SentenceRecord r;
  r.id = s.sentence_id;

  std::vector<std::size_t> starts;
  starts.reserve(s.rows.size());
  std::size_t pos = 0;
  bool any_extra = false;
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    if (i > 0) {
      r.text.push_back(' ');
      ++pos;
    }
    starts.push_back(pos);
    r.text += s.rows[i].token;
    pos += utf8::length(s.rows[i].token);
    any_extra = any_extra || !s.rows[i].extra_cols.empty();
  }

  const auto token_end = [&](std::size_t i) {
    return starts[i] + utf8::length(s.rows[i].token);
  };
  std::optional<CharSpan> open;
  auto close = [&] {
    if (!open) return;
    open->span_id = "T" + std::to_string(r.spans.size() + 1);
    open->surface = utf8::slice(r.text, open->start, open->end);
    r.spans.push_back(std::move(*open));
    open.reset();
  };
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const auto tag = parse_tag(s.rows[i].tag);
    if (tag->prefix == 'I') {
      open->end = token_end(i);
      continue;
    }
    close();
    if (tag->prefix == 'B') {
      open = CharSpan{starts[i], token_end(i), tag->label, {}, {}};
    }
  }
  close();

  if (any_extra) {
    Json rows = Json::array();
    for (const auto& row : s.rows) {
      Json cols = Json::array({row.source_file, row.start_char, row.end_char});
      for (const auto& c : row.extra_cols) cols.push_back(c);
      rows.push_back(std::move(cols));
    }
    r.extra[std::string(kExtraKey)] = std::move(rows);
  }
  return r;
}

ConllSentence record_to_bio(const SentenceRecord& r, Side which) {
  const bool source = which == Side::Source;
  if (!source && (!r.text_rus || !r.spans_rus)) {
    throw MissingField(!r.text_rus ? "text_rus" : "spans_rus");
  }
  const std::string& text = source ? r.text : *r.text_rus;
  std::vector<CharSpan> spans = source ? r.spans : *r.spans_rus;
  std::sort(spans.begin(), spans.end(), [](const CharSpan& a, const CharSpan& b) {
    return std::tie(a.start, a.end) < std::tie(b.start, b.end);
  });

  std::vector<std::string> overlapping;
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (spans[i].start < spans[i - 1].end) {
      overlapping.push_back(spans[i - 1].span_id);
      overlapping.push_back(spans[i].span_id);
    }
  }
  if (!overlapping.empty()) {
    std::sort(overlapping.begin(), overlapping.end());
    overlapping.erase(std::unique(overlapping.begin(), overlapping.end()),
                      overlapping.end());
    throw OverlappingSpans(std::move(overlapping));
  }

  const std::u32string cps = utf8::decode(text);
  std::vector<std::size_t> cuts;
  for (const auto& s : spans) {
    cuts.push_back(s.start);
    cuts.push_back(s.end);
  }
  std::sort(cuts.begin(), cuts.end());

  std::vector<Token> pieces;
  for (const Token& t : whitespace_tokens(cps)) {
    std::size_t b = t.start;
    auto it = std::upper_bound(cuts.begin(), cuts.end(), b);
    for (; it != cuts.end() && *it < t.end; ++it) {
      if (*it > b) {
        pieces.push_back({b, *it});
        b = *it;
      }
    }
    pieces.push_back({b, t.end});
  }

  const Json* extra = nullptr;
  if (source) {
    auto it = r.extra.find(std::string(kExtraKey));
    if (it != r.extra.end() && it->is_array() && it->size() == pieces.size()) {
      extra = &*it;
    }
  }

  ConllSentence out;
  out.sentence_id = r.id;
  std::size_t span_idx = 0;
  std::optional<std::size_t> open;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const Token& p = pieces[i];
    while (span_idx < spans.size() && spans[span_idx].end <= p.start) ++span_idx;
    TokenRow row;
    row.token = utf8::encode(std::u32string_view(cps).substr(p.start, p.end - p.start));
    row.source_file = r.id;
    row.start_char = p.start;
    row.end_char = p.end;
    if (span_idx < spans.size() && spans[span_idx].start < p.end) {
      row.tag = (open == span_idx ? "I-" : "B-") + spans[span_idx].label;
      open = span_idx;
    } else {
      row.tag = "O";
      open.reset();
    }
    if (extra) {
      const Json& cols = (*extra)[i];
      row.source_file = cols.at(0).get<std::string>();
      row.start_char = cols.at(1).get<std::size_t>();
      row.end_char = cols.at(2).get<std::size_t>();
      for (std::size_t c = 3; c < cols.size(); ++c) {
        row.extra_cols.push_back(cols[c].get<std::string>());
      }
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::vector<DuplicateGroup> detect_duplicates(
    const std::vector<SentenceRecord>& ds) {
  std::map<std::string_view, std::vector<const SentenceRecord*>> by_text;
  for (const auto& r : ds) by_text[trim(r.text)].push_back(&r);

  std::vector<DuplicateGroup> out;
  for (auto& [text, members] : by_text) {
    if (members.size() < 2) continue;
    DuplicateGroup g;
    g.text = std::string(text);
    const auto first_key = annotation_key(*members.front());
    for (const auto* m : members) {
      g.ids.push_back(m->id);
      if (annotation_key(*m) != first_key) g.annotation_conflict = true;
    }
    std::sort(g.ids.begin(), g.ids.end());
    out.push_back(std::move(g));
  }
  return out;
}

std::size_t duplicate_count(const std::vector<DuplicateGroup>& groups) {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.ids.size() - 1;
  return n;
}

LabelStats entity_stats(const std::vector<SentenceRecord>& ds, Side which) {
  LabelStats stats;
  stats.sentences = ds.size();
  for (const auto& r : ds) {
    const std::vector<CharSpan>* spans = &r.spans;
    if (which == Side::Target) {
      if (!r.spans_rus) continue;
      spans = &*r.spans_rus;
    }
    for (const auto& s : *spans) {
      ++stats.counts[s.label];
      ++stats.spans;
    }
  }
  return stats;
}

std::string format_stats_table(
    const std::vector<std::pair<std::string, LabelStats>>& columns) {
  std::set<std::string> labels;
  for (const auto& [_, st] : columns) {
    for (const auto& [label, __] : st.counts) labels.insert(label);
  }
  // Most frequent first, by the first column.
  std::vector<std::string> rows(labels.begin(), labels.end());
  if (!columns.empty()) {
    const auto& lead = columns.front().second;
    std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
      return lead.count(a) > lead.count(b);
    });
  }

  std::size_t name_w = std::string_view("Entity name").size();
  for (const auto& l : rows) name_w = std::max(name_w, l.size());
  std::size_t col_w = 8;
  for (const auto& [name, _] : columns) col_w = std::max(col_w, name.size());

  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(name_w)) << "Entity name";
  for (const auto& [name, _] : columns) {
    os << "  " << std::right << std::setw(static_cast<int>(col_w)) << name;
  }
  os << '\n';
  auto row = [&](const std::string& name, auto value_of) {
    os << std::left << std::setw(static_cast<int>(name_w)) << name;
    for (const auto& [_, st] : columns) {
      os << "  " << std::right << std::setw(static_cast<int>(col_w)) << value_of(st);
    }
    os << '\n';
  };
  for (const auto& l : rows) {
    row(l, [&](const LabelStats& st) { return st.count(l); });
  }
  row("Total spans", [](const LabelStats& st) { return st.spans; });
  row("Sentences", [](const LabelStats& st) { return st.sentences; });
  return os.str();
}

Json stats_to_json(const LabelStats& stats) {
  Json counts = Json::object();
  for (const auto& [label, n] : stats.counts) counts[label] = n;
  return Json{{"sentences", stats.sentences},
              {"spans", stats.spans},
              {"labels", std::move(counts)}};
}

}  // namespace annobridge
