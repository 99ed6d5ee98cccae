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

#include "annobridge/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "annobridge/utf8.hpp"

namespace annobridge {
namespace {

using NGramCounts = std::map<std::vector<std::string>, std::size_t>;

NGramCounts ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NGramCounts out;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++out[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return out;
}

std::string fixed4(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

Json counts_to_json(const MatchCounts& c) {
  return Json{{"exact", c.exact},
              {"wider", c.wider},
              {"narrower", c.narrower},
              {"mismatched", c.mismatched},
              {"spans_checked", c.spans_checked()},
              {"unhandled", c.unhandled}};
}

}  // namespace

std::string_view to_string(MatchClass c) {
  switch (c) {
    case MatchClass::Exact:
      return "Exact";
    case MatchClass::Wider:
      return "Wider";
    case MatchClass::Narrower:
      return "Narrower";
    case MatchClass::Mismatch:
      return "Mismatch";
    case MatchClass::Unhandled:
      return "Unhandled";
  }
  return "?";
}

MatchClass classify_match(const CharSpan& gold, const std::optional<CharSpan>& sys) {
  if (!sys) return MatchClass::Unhandled;
  if (sys->start == gold.start && sys->end == gold.end) return MatchClass::Exact;
  if (sys->start <= gold.start && sys->end >= gold.end) return MatchClass::Wider;
  if (gold.start <= sys->start && gold.end >= sys->end) return MatchClass::Narrower;
  return MatchClass::Mismatch;
}

void MatchCounts::add(MatchClass c) {
  switch (c) {
    case MatchClass::Exact:
      ++exact;
      break;
    case MatchClass::Wider:
      ++wider;
      break;
    case MatchClass::Narrower:
      ++narrower;
      break;
    case MatchClass::Mismatch:
      ++mismatched;
      break;
    case MatchClass::Unhandled:
      ++unhandled;
      break;
  }
}

TransferReport transfer_report(const std::vector<SentenceRecord>& gold,
                               const std::vector<SentenceRecord>& sys) {
  std::map<std::string_view, const SentenceRecord*> by_id;
  for (const auto& r : sys) {
    if (!by_id.emplace(r.id, &r).second) throw IdCollision("system id repeated: " + r.id);
  }
  std::set<std::string_view> seen;
  TransferReport report;
  for (const auto& g : gold) {
    if (!seen.insert(g.id).second) throw IdCollision("gold id repeated: " + g.id);
    if (!g.spans_rus) throw MissingField("spans_rus");
    ++report.total_entries;

    std::map<std::string_view, const CharSpan*> sys_spans;
    if (auto it = by_id.find(g.id); it != by_id.end()) {
      if (it->second->spans_rus) {
        for (const auto& s : *it->second->spans_rus) {
          if (!sys_spans.emplace(s.span_id, &s).second) {
            throw IdCollision("span id " + s.span_id + " repeated in system record " + g.id);
          }
        }
      }
    } else {
      report.missing_records.push_back(g.id);
    }

    std::set<std::string_view> gold_ids;
    for (const auto& gs : *g.spans_rus) {
      if (!gold_ids.insert(gs.span_id).second) {
        throw IdCollision("span id " + gs.span_id + " repeated in gold record " + g.id);
      }
      std::optional<CharSpan> match;
      if (auto it = sys_spans.find(gs.span_id); it != sys_spans.end()) match = *it->second;
      const MatchClass c = classify_match(gs, match);
      report.counts.add(c);
      report.per_label[gs.label].add(c);
    }
  }
  return report;
}

std::string format_transfer_table(
    const std::vector<std::pair<std::string, TransferReport>>& columns) {
  const std::vector<std::pair<std::string, std::size_t (*)(const TransferReport&)>> rows = {
      {"Total Entries", [](const TransferReport& r) { return r.total_entries; }},
      {"Exact Match", [](const TransferReport& r) { return r.counts.exact; }},
      {"Wider Match", [](const TransferReport& r) { return r.counts.wider; }},
      {"Narrower Match", [](const TransferReport& r) { return r.counts.narrower; }},
      {"Mismatched", [](const TransferReport& r) { return r.counts.mismatched; }},
      {"Spans Checked", [](const TransferReport& r) { return r.counts.spans_checked(); }},
      {"Unhandled", [](const TransferReport& r) { return r.counts.unhandled; }},
  };
  std::size_t col_w = 8;
  for (const auto& [name, _] : columns) col_w = std::max(col_w, name.size());
  std::ostringstream os;
  os << std::left << std::setw(16) << "";
  for (const auto& [name, _] : columns) os << "  " << std::right << std::setw(static_cast<int>(col_w)) << name;
  os << '\n';
  for (const auto& [label, get] : rows) {
    os << std::left << std::setw(16) << label;
    for (const auto& [_, report] : columns) {
      os << "  " << std::right << std::setw(static_cast<int>(col_w)) << get(report);
    }
    os << '\n';
  }
  return os.str();
}

Json transfer_report_to_json(const TransferReport& r) {
  Json j = Json::object();
  j["total_entries"] = r.total_entries;
  const Json counts = counts_to_json(r.counts);
  for (const auto& [k, v] : counts.items()) j[k] = v;
  Json labels = Json::object();
  for (const auto& [label, c] : r.per_label) labels[label] = counts_to_json(c);
  j["per_label"] = std::move(labels);
  j["missing_records"] = r.missing_records;
  return j;
}

std::vector<std::string> bleu_tokenize(std::string_view text) {
  const std::u32string cps = utf8::to_lower(utf8::decode(text));
  std::vector<std::string> out;
  std::u32string word;
  auto flush = [&] {
    if (!word.empty()) out.push_back(utf8::encode(word));
    word.clear();
  };
  for (char32_t c : cps) {
    if (utf8::is_space(c)) {
      flush();
    } else if (utf8::is_punct(c)) {
      flush();
      out.push_back(utf8::encode(std::u32string(1, c)));
    } else {
      word.push_back(c);
    }
  }
  flush();
  return out;
}

double bleu(const std::vector<std::string>& candidates,
            const std::vector<std::string>& references, BleuOptions options) {
  if (candidates.size() != references.size()) {
    throw LengthMismatch("BLEU needs one reference per candidate: " +
                         std::to_string(candidates.size()) + " vs " +
                         std::to_string(references.size()));
  }
  if (candidates.empty()) throw EmptyCorpus("BLEU over an empty corpus");
  if (options.max_n < 1) throw std::invalid_argument("max_n must be >= 1");

  const auto n_max = static_cast<std::size_t>(options.max_n);
  std::vector<double> matched(n_max + 1, 0.0);
  std::vector<double> total(n_max + 1, 0.0);
  double cand_len = 0.0;
  double ref_len = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto cand = bleu_tokenize(candidates[i]);
    const auto ref = bleu_tokenize(references[i]);
    cand_len += static_cast<double>(cand.size());
    ref_len += static_cast<double>(ref.size());
    for (std::size_t n = 1; n <= n_max; ++n) {
      const auto c = ngrams(cand, n);
      const auto r = ngrams(ref, n);
      for (const auto& [gram, count] : c) {
        const auto it = r.find(gram);
        matched[n] += static_cast<double>(std::min(count, it == r.end() ? 0 : it->second));
        total[n] += static_cast<double>(count);
      }
    }
  }
  if (cand_len == 0.0) return 0.0;

  // Orders with no candidate n-grams at all (every sentence shorter than n)
  // are left out of the geometric mean.
  double log_sum = 0.0;
  int orders = 0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    if (total[n] == 0.0) continue;
    double p = matched[n] / total[n];
    if (options.add_one_smoothing && n >= 2) p = (matched[n] + 1.0) / (total[n] + 1.0);
    if (p == 0.0) return 0.0;
    log_sum += std::log(p);
    ++orders;
  }
  const double bp = cand_len > ref_len ? 1.0 : std::exp(1.0 - ref_len / cand_len);
  return bp * std::exp(log_sum / orders);
}

EmbeddingMatrix stack_rows(const std::vector<EmbeddingVector>& vectors) {
  if (vectors.empty()) return EmbeddingMatrix(0, 0);
  const auto dim = vectors.front().size();
  EmbeddingMatrix m(static_cast<Eigen::Index>(vectors.size()), dim);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != dim) throw DimMismatch("embedding dims differ within a batch");
    m.row(static_cast<Eigen::Index>(i)) = vectors[i].transpose();
  }
  return m;
}

std::string format_translation_table(const TranslationScores& s) {
  std::ostringstream os;
  auto row = [&](std::string_view name, const std::optional<double>& v, std::string_view note) {
    os << std::left << std::setw(22) << name << std::right << std::setw(9)
       << (v ? fixed4(*v) : std::string("n/a"));
    if (!note.empty()) os << "  " << note;
    os << '\n';
  };
  row("BLEU score", s.bleu, "");
  row("BLEU-like", s.bleu_like, "mean distance(gold_ru, sys_ru)");
  row("Parallel comparison", s.parallel_comparison,
      "mean distance(en, gold_ru) - mean distance(en, sys_ru)");
  return os.str();
}

Json translation_scores_to_json(const TranslationScores& s) {
  Json j = Json::object();
  j["bleu"] = s.bleu;
  j["bleu_like"] = s.bleu_like ? Json(*s.bleu_like) : Json(nullptr);
  j["parallel_comparison"] = s.parallel_comparison ? Json(*s.parallel_comparison) : Json(nullptr);
  j["parallel_comparison_sign"] = "gold_minus_system";
  return j;
}

}  // namespace annobridge
