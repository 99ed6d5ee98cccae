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

#include "annobridge/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "annobridge/utf8.hpp"

namespace annobridge {
namespace {

bool is_window_start(std::u32string_view s, std::size_t i) {
  if (utf8::is_space(s[i])) return false;
  return i == 0 || utf8::is_space(s[i - 1]) || utf8::is_word(s[i - 1]) != utf8::is_word(s[i]);
}

bool is_window_end(std::u32string_view s, std::size_t j) {
  if (utf8::is_space(s[j - 1])) return false;
  return j == s.size() || utf8::is_space(s[j]) ||
         utf8::is_word(s[j - 1]) != utf8::is_word(s[j]);
}

CharSpan make_span(std::u32string_view hay, std::size_t start, std::size_t end) {
  CharSpan s;
  s.start = start;
  s.end = end;
  s.surface = utf8::encode(hay.substr(start, end - start));
  return s;
}

struct Window {
  std::size_t start = 0;
  std::size_t length = 0;
  std::size_t distance = 0;
};

// a.distance / max(a.len, m) < b.distance / max(b.len, m), exactly.
bool better(const Window& a, const Window& b, std::size_t m) {
  return a.distance * std::max(b.length, m) < b.distance * std::max(a.length, m);
}

std::optional<Window> search_windows(std::u32string_view hay, std::u32string_view needle,
                                     double threshold, std::size_t cursor) {
  const std::size_t m = needle.size();
  if (m == 0 || cursor >= hay.size()) return std::nullopt;
  const auto slack = static_cast<std::size_t>(
      std::ceil(std::max(threshold, 0.0) * static_cast<double>(m) - 1e-9));
  const std::size_t min_len = m > slack ? m - slack : 1;
  const std::size_t max_len = m + slack;

  std::optional<Window> best;
  std::vector<std::size_t> row(m + 1);
  for (std::size_t i = cursor; i < hay.size(); ++i) {
    if (!is_window_start(hay, i)) continue;
    // row[k] = distance between the window read so far and needle[0, k).
    for (std::size_t k = 0; k <= m; ++k) row[k] = k;
    const std::size_t limit = std::min(max_len, hay.size() - i);
    for (std::size_t len = 1; len <= limit; ++len) {
      const char32_t c = hay[i + len - 1];
      std::size_t diag = row[0];
      row[0] = len;
      for (std::size_t k = 1; k <= m; ++k) {
        const std::size_t up = row[k];
        row[k] = std::min({up + 1, row[k - 1] + 1, diag + (needle[k - 1] == c ? 0 : 1)});
        diag = up;
      }
      if (len < min_len || !is_window_end(hay, i + len)) continue;
      const Window w{i, len, row[m]};
      if (!best || better(w, *best, m)) best = w;
    }
  }
  return best;
}

std::optional<FuzzyMatch> to_match(std::u32string_view hay, std::size_t m,
                                   const std::optional<Window>& w) {
  if (!w) return std::nullopt;
  return FuzzyMatch{make_span(hay, w->start, w->start + w->length),
                    static_cast<double>(w->distance) /
                        static_cast<double>(std::max(w->length, m))};
}

bool within(const Window& w, std::size_t m, double threshold) {
  return static_cast<double>(w.distance) <=
         threshold * static_cast<double>(std::max(w.length, m)) + 1e-12;
}

}  // namespace

std::optional<CharSpan> locate_exact(std::string_view haystack, std::string_view needle,
                                     std::size_t cursor) {
  const std::u32string hay = utf8::decode(haystack);
  const std::u32string pin = utf8::decode(needle);
  if (pin.empty() || cursor > hay.size()) return std::nullopt;
  const auto pos = std::u32string_view(hay).find(pin, cursor);
  if (pos == std::u32string_view::npos) return std::nullopt;
  return make_span(hay, pos, pos + pin.size());
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t k = 0; k <= b.size(); ++k) row[k] = k;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t k = 1; k <= b.size(); ++k) {
      const std::size_t up = row[k];
      row[k] = std::min({up + 1, row[k - 1] + 1, diag + (a[i - 1] == b[k - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(utf8::decode(a), utf8::decode(b));
}

std::optional<FuzzyMatch> best_fuzzy_window(std::string_view haystack,
                                            std::string_view needle, double threshold,
                                            std::size_t cursor) {
  const std::u32string hay = utf8::decode(haystack);
  const std::u32string pin = utf8::decode(needle);
  return to_match(hay, pin.size(), search_windows(hay, pin, threshold, cursor));
}

std::optional<FuzzyMatch> fuzzy_locate(std::string_view haystack, std::string_view needle,
                                       double threshold, std::size_t cursor) {
  const std::u32string hay = utf8::decode(haystack);
  const std::u32string pin = utf8::decode(needle);
  const auto w = search_windows(hay, pin, threshold, cursor);
  if (!w || !within(*w, pin.size(), threshold)) return std::nullopt;
  return to_match(hay, pin.size(), w);
}

Resolution resolve_spans(const SentenceRecord& r, const std::vector<RawRusSpan>& raws,
                         const TransferConfig& cfg) {
  Resolution out;
  const std::u32string hay = utf8::decode(r.text_rus.value_or(""));
  std::map<std::u32string, std::size_t> cursors;

  for (const auto& raw : raws) {
    const std::u32string needle = utf8::decode(raw.surface);
    std::size_t cursor = 0;
    if (cfg.occurrence_policy == OccurrencePolicy::OrderedCursor) cursor = cursors[needle];

    auto unresolved = [&](std::string reason, std::optional<double> best) {
      out.unresolved.push_back({raw.span_id, raw.label, raw.surface, std::move(reason), best});
    };
    if (needle.empty()) {
      unresolved("empty surface", std::nullopt);
      continue;
    }

    // Exact occurrences that start and end on word boundaries win. A hit
    // inside a word (a truncated inflection is a prefix of the real word)
    // is kept as a last resort behind the fuzzy search.
    std::optional<std::size_t> aligned;
    std::optional<std::size_t> sub_word;
    const std::u32string_view view(hay);
    for (auto pos = cursor <= hay.size() ? view.find(needle, cursor) : view.npos;
         pos != view.npos; pos = view.find(needle, pos + 1)) {
      if (is_window_start(view, pos) && is_window_end(view, pos + needle.size())) {
        aligned = pos;
        break;
      }
      if (!sub_word) sub_word = pos;
    }
    auto bind_exact = [&](std::size_t pos) {
      ResolvedSpan rs;
      rs.span = make_span(hay, pos, pos + needle.size());
      rs.method = MatchMethod::Exact;
      rs.span.label = raw.label;
      rs.span.span_id = raw.span_id;
      out.resolved.push_back(std::move(rs));
      cursors[needle] = pos + needle.size();
    };
    if (aligned) {
      bind_exact(*aligned);
      continue;
    }
    if (!cfg.fuzzy_enabled) {
      if (sub_word) {
        bind_exact(*sub_word);
      } else {
        unresolved("no exact occurrence; fuzzy matching disabled", std::nullopt);
      }
      continue;
    }
    const auto w = search_windows(hay, needle, cfg.fuzzy_threshold, cursor);
    const bool accepted = w && within(*w, needle.size(), cfg.fuzzy_threshold);
    if (!accepted && sub_word) {
      bind_exact(*sub_word);
      continue;
    }
    if (!w) {
      unresolved("no candidate window", std::nullopt);
      continue;
    }
    const auto match = to_match(hay, needle.size(), w);
    if (!accepted) {
      unresolved("best window above fuzzy threshold", match->score);
      continue;
    }
    ResolvedSpan rs;
    rs.span = match->span;
    rs.span.label = raw.label;
    rs.span.span_id = raw.span_id;
    rs.method = MatchMethod::Fuzzy;
    rs.fuzzy_score = match->score;
    out.resolved.push_back(std::move(rs));
    cursors[needle] = w->start + w->length;
  }

  for (std::size_t a = 0; a < out.resolved.size(); ++a) {
    for (std::size_t b = a + 1; b < out.resolved.size(); ++b) {
      const auto& x = out.resolved[a].span;
      const auto& y = out.resolved[b].span;
      if (x.start < y.end && y.start < x.end) {
        out.resolved[a].overlaps = true;
        out.resolved[b].overlaps = true;
      }
    }
  }
  return out;
}

SentenceRecord translate_record(const SentenceRecord& r, ChatTransport& transport,
                                const PromptTemplate& translate, RetryPolicy policy,
                                int* attempts) {
  policy.validator = [&r](const std::string& content) {
    validate_translate_response(r, extract_json(content));
  };
  const ChatExchange done = chat(transport, render_prompt(translate, r), policy);
  SentenceRecord out = r;
  out.text_rus = validate_translate_response(r, extract_json(done.raw_response));
  if (attempts) *attempts = done.attempts;
  return out;
}

TransferOutcome transfer_record(const SentenceRecord& r, ChatTransport& transport,
                                const PromptSet& prompts, const TransferConfig& cfg,
                                RetryPolicy policy) {
  TransferOutcome out;
  out.record = r;
  if (!out.record.text_rus) {
    if (!prompts.translate) throw MissingField("text_rus");
    out.record = translate_record(r, transport, *prompts.translate, policy,
                                  &out.translate_attempts);
  }
  SentenceRecord& work = out.record;
  if (work.spans.empty()) {
    work.spans_rus.emplace();
    return out;
  }

  policy.validator = [&work](const std::string& content) {
    validate_transfer_response(work, extract_json(content));
  };
  const ChatExchange done = chat(transport, render_prompt(prompts.transfer, work), policy);
  out.attempts = done.attempts;
  const auto raws = validate_transfer_response(work, extract_json(done.raw_response));
  Resolution res = resolve_spans(work, raws, cfg);

  std::vector<CharSpan> spans;
  spans.reserve(res.resolved.size());
  for (auto& rs : res.resolved) spans.push_back(std::move(rs.span));
  work.spans_rus = std::move(spans);
  out.unresolved = std::move(res.unresolved);
  return out;
}

}  // namespace annobridge
