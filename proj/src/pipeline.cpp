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

#include "annobridge/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "annobridge/corpus.hpp"
#include "annobridge/jsonl.hpp"

namespace annobridge {
namespace {

std::filesystem::path with_suffix(const std::filesystem::path& p, const std::string& suffix) {
  return p.string() + suffix;
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

std::string records_to_jsonl(const std::vector<SentenceRecord>& records) {
  std::string out;
  for (const auto& r : records) out += record_to_json(r).dump() + "\n";
  return out;
}

// Results persisted by earlier runs. A torn final line (crash mid-append)
// is ignored.
std::map<std::string, SentenceRecord> load_partial(const std::filesystem::path& path) {
  std::map<std::string, SentenceRecord> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    try {
      SentenceRecord r = record_from_json(j);
      out[r.id] = std::move(r);
    } catch (const Error&) {
    }
  }
  return out;
}

std::vector<std::filesystem::path> corpus_files(const std::filesystem::path& p) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(p)) {
    for (const auto& e : std::filesystem::directory_iterator(p)) {
      if (e.is_regular_file() && !e.path().filename().string().starts_with(".")) {
        files.push_back(e.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(p);
  }
  return files;
}

bool looks_like_jsonl(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  return std::filesystem::is_regular_file(p) && (ext == ".jsonl" || ext == ".json");
}

std::string file_key(const std::string& id) {
  std::string key = id.substr(0, id.rfind(':'));
  if (key.empty() || key == id) key = "records";
  for (char& c : key) {
    if (c == '/' || c == '\\' || c == ':' || c == ' ') c = '_';
  }
  return key;
}

template <typename Fn>
void run_pool(std::size_t items, std::size_t workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < items; i = next++) fn(i);
  };
  const std::size_t n = std::min(std::max<std::size_t>(workers, 1), std::max<std::size_t>(items, 1));
  if (n == 1) {
    loop();
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < n; ++t) pool.emplace_back(loop);
}

struct BatchState {
  Ledger ledger;
  std::filesystem::path partial;
  std::map<std::string, SentenceRecord> results;
  std::mutex mu;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  std::size_t requests = 0;

  void success(const SentenceRecord& r, int attempts) {
    std::lock_guard lock(mu);
    append_line(partial, record_to_json(r).dump());
    results[r.id] = r;
    ledger.mark_done(r.id);
    ++succeeded;
    requests += static_cast<std::size_t>(attempts);
  }

  void failure(const std::string& id, const std::string& error, int attempts, std::ostream& err) {
    std::lock_guard lock(mu);
    ledger.mark_failed(id, error);
    ++failed;
    requests += static_cast<std::size_t>(attempts);
    err << "warning: record " << id << " failed: " << error << '\n';
  }
};

// Shared skeleton of translate/transfer: resume from ledger and partial
// results, process pending records, write the merged output.
template <typename Work, typename Strip>
int run_batch(const BatchOptions& opts, const PipelineConfig& cfg,
              std::vector<SentenceRecord> records, const std::vector<SentenceRecord>& todo_in,
              const char* verb, Work&& work, Strip&& strip, std::ostream& out,
              std::ostream& err) {
  BatchState state{Ledger::load(opts.ledger.value_or(with_suffix(opts.output, ".ledger.jsonl")),
                                cfg.max_attempts),
                   with_suffix(opts.output, ".partial.jsonl"),
                   {},
                   {},
                   0,
                   0,
                   0};
  state.results = load_partial(state.partial);

  std::vector<SentenceRecord> todo = pending(todo_in, state.ledger);
  const std::size_t already_done = todo_in.size() - todo.size();
  if (opts.limit && todo.size() > *opts.limit) todo.resize(*opts.limit);

  // Bad credentials fail every request alike; stop instead of burning
  // through the batch.
  std::atomic<bool> auth_failed{false};
  std::string auth_error;
  run_pool(todo.size(), cfg.workers, [&](std::size_t i) {
    if (auth_failed) return;
    const SentenceRecord& r = todo[i];
    try {
      work(r, state);
    } catch (const AuthError& e) {
      std::lock_guard lock(state.mu);
      if (!auth_failed.exchange(true)) auth_error = e.what();
    } catch (const Exhausted& e) {
      state.failure(r.id, e.last_error(), e.attempts(), err);
    } catch (const Error& e) {
      state.failure(r.id, e.what(), 1, err);
    }
  });

  for (auto& r : records) {
    if (auto it = state.results.find(r.id); it != state.results.end() && state.ledger.is_done(r.id)) {
      r = it->second;
    } else {
      strip(r);
    }
  }
  write_file_atomic(opts.output, records_to_jsonl(records));

  std::size_t exhausted = 0;
  for (const auto& r : todo_in) exhausted += state.ledger.is_exhausted(r.id) ? 1 : 0;
  out << verb << ": " << state.succeeded << " succeeded, " << state.failed << " failed, "
      << already_done << " already handled, "
      << (todo_in.size() - already_done - todo.size()) << " deferred by --limit\n"
      << "requests: " << state.requests << '\n'
      << "exhausted records: " << exhausted << '\n'
      << "wrote " << records.size() << " records to " << opts.output.string() << '\n';
  if (auth_failed) {
    err << "error: authentication failed, batch stopped: " << auth_error << '\n';
    return kExitInputError;
  }
  return state.failed > 0 ? kExitPartialFailure : kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

PipelineConfig PipelineConfig::from_json(const Json& j) {
  static const std::set<std::string> kKeys = {
      "chat",         "embedding",  "translate_template", "transfer",
      "max_attempts", "backoff_ms", "workers",            "transcript"};
  if (!j.is_object()) throw Error("config must be a JSON object");
  for (const auto& [k, _] : j.items()) {
    if (!kKeys.contains(k)) throw Error("unknown config key '" + k + "'");
  }
  PipelineConfig c;
  auto endpoint = [](const Json& e, Endpoint& ep, std::size_t* batch) {
    ep.base_url = e.value("base_url", ep.base_url);
    ep.model = e.value("model", ep.model);
    if (e.contains("timeout_s")) ep.timeout = std::chrono::seconds(e["timeout_s"].get<int>());
    if (batch && e.contains("batch_size")) *batch = e["batch_size"].get<std::size_t>();
  };
  try {
    if (j.contains("chat")) endpoint(j["chat"], c.chat, nullptr);
    if (j.contains("embedding")) endpoint(j["embedding"], c.embedding, &c.embed_batch_size);
    if (j.contains("translate_template")) {
      const auto kind = prompt_kind_from_string(j["translate_template"].get<std::string>());
      if (!kind || *kind == PromptKind::TransferSpans) {
        throw Error("translate_template must be translate1 or translate2");
      }
      c.translate_template = *kind;
    }
    if (j.contains("transfer")) {
      const Json& t = j["transfer"];
      c.transfer.fuzzy_threshold = t.value("fuzzy_threshold", c.transfer.fuzzy_threshold);
      c.transfer.fuzzy_enabled = t.value("fuzzy_enabled", c.transfer.fuzzy_enabled);
      if (t.contains("occurrence_policy")) {
        const auto p = t["occurrence_policy"].get<std::string>();
        if (p == "ordered-cursor") {
          c.transfer.occurrence_policy = OccurrencePolicy::OrderedCursor;
        } else if (p == "leftmost") {
          c.transfer.occurrence_policy = OccurrencePolicy::Leftmost;
        } else {
          throw Error("occurrence_policy must be ordered-cursor or leftmost");
        }
      }
    }
    c.max_attempts = j.value("max_attempts", c.max_attempts);
    if (j.contains("backoff_ms")) c.backoff_base = std::chrono::milliseconds(j["backoff_ms"].get<long>());
    c.workers = j.value("workers", c.workers);
    if (j.contains("transcript")) c.transcript = j["transcript"].get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  const Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error("config " + path.string() + " is not valid JSON");
  return from_json(j);
}

void PipelineConfig::validate() const {
  if (workers < 1) throw Error("workers must be >= 1");
  if (max_attempts < 1) throw Error("max_attempts must be >= 1");
  if (transfer.fuzzy_threshold < 0.0 || transfer.fuzzy_threshold >= 1.0) {
    throw Error("fuzzy_threshold must lie in [0, 1)");
  }
  if (embed_batch_size < 1) throw Error("embedding batch_size must be >= 1");
}

RetryPolicy PipelineConfig::retry_policy() const {
  RetryPolicy p;
  p.max_attempts = max_attempts;
  p.backoff_base = backoff_base;
  return p;
}

// ---------------------------------------------------------------------------
// convert

int cmd_convert(const ConvertOptions& opts, std::ostream& out, std::ostream& err) {
  if (!std::filesystem::exists(opts.corpus)) {
    err << "error: " << opts.corpus.string() << " does not exist\n";
    return kExitInputError;
  }
  std::vector<ConllSentence> sentences;
  std::vector<std::string> failures;
  const auto files = corpus_files(opts.corpus);
  for (const auto& f : files) {
    try {
      auto s = parse_conll(f);
      sentences.insert(sentences.end(), std::make_move_iterator(s.begin()),
                       std::make_move_iterator(s.end()));
    } catch (const Error& e) {
      failures.push_back(e.what());
    }
  }
  if (!failures.empty()) {
    err << "error: " << failures.size() << " file(s) failed to parse:\n";
    for (const auto& f : failures) err << "  " << f << '\n';
    return kExitInputError;
  }

  std::vector<SentenceRecord> records;
  std::size_t violations = 0;
  std::size_t skipped = 0;
  std::size_t repaired = 0;
  for (const auto& s : sentences) {
    const auto v = validate_bio(s);
    for (const auto& x : v) {
      err << "warning: " << x.sentence_id << " row " << x.row_index << ": " << to_string(x.kind)
          << " (" << s.rows[x.row_index].tag << ")" << (opts.repair_bio ? ", repaired" : "")
          << '\n';
    }
    violations += v.size();
    if (!v.empty()) {
      if (!opts.repair_bio) {
        ++skipped;
        continue;
      }
      ++repaired;
      records.push_back(conll_to_record(repair_bio(s)));
    } else {
      records.push_back(conll_to_record(s));
    }
  }
  try {
    write_jsonl(opts.out, records);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  out << "files: " << files.size() << ", sentences: " << sentences.size()
      << ", records written: " << records.size() << '\n'
      << "BIO violations: " << violations << " (" << repaired << " sentences repaired, "
      << skipped << " skipped)\n\n"
      << format_stats_table({{"Source", entity_stats(records, Side::Source)}});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// audit

int cmd_audit(const AuditOptions& opts, std::ostream& out, std::ostream& err) {
  std::vector<SentenceRecord> records;
  std::map<std::string, std::size_t> by_kind;
  std::size_t violations = 0;
  std::size_t overlapping = 0;
  try {
    if (looks_like_jsonl(opts.input)) {
      records = read_jsonl(opts.input);
      for (const auto& r : records) {
        try {
          for (const auto& v : validate_bio(record_to_bio(r, Side::Source))) {
            ++by_kind[std::string(to_string(v.kind))];
            ++violations;
          }
        } catch (const OverlappingSpans&) {
          ++overlapping;
        }
      }
    } else {
      for (const auto& f : corpus_files(opts.input)) {
        for (const auto& s : parse_conll(f)) {
          const auto v = validate_bio(s);
          for (const auto& x : v) ++by_kind[std::string(to_string(x.kind))];
          violations += v.size();
          records.push_back(conll_to_record(v.empty() ? s : repair_bio(s)));
        }
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  const auto groups = detect_duplicates(records);
  const std::size_t dups = duplicate_count(groups);
  const auto conflicts = static_cast<std::size_t>(std::count_if(
      groups.begin(), groups.end(), [](const DuplicateGroup& g) { return g.annotation_conflict; }));
  const LabelStats stats = entity_stats(records, Side::Source);

  out << "records: " << records.size() << '\n';
  out << "BIO violations: " << violations;
  if (!by_kind.empty()) {
    out << " (";
    bool first = true;
    for (const auto& [k, n] : by_kind) {
      out << (first ? "" : ", ") << k << ": " << n;
      first = false;
    }
    out << ")";
  }
  out << '\n';
  if (overlapping) out << "records with overlapping spans: " << overlapping << '\n';
  out << dups << " duplicates in " << groups.size() << " groups (" << conflicts
      << " with annotation conflict)\n";
  std::size_t shown = 0;
  for (const auto& g : groups) {
    if (shown++ >= opts.show_groups) {
      out << "  ... " << groups.size() - opts.show_groups << " more groups\n";
      break;
    }
    out << "  " << (g.annotation_conflict ? "[annotation conflict] " : "") << g.ids.size()
        << " copies:";
    for (const auto& id : g.ids) out << ' ' << id;
    out << '\n';
  }
  out << '\n' << format_stats_table({{"Source", stats}});

  if (opts.json_out) {
    Json j = Json::object();
    j["records"] = records.size();
    Json kinds = Json::object();
    for (const auto& [k, n] : by_kind) kinds[k] = n;
    j["bio_violations"] = Json{{"total", violations}, {"by_kind", std::move(kinds)}};
    j["duplicates"] = dups;
    Json jg = Json::array();
    for (const auto& g : groups) {
      jg.push_back(Json{{"ids", g.ids}, {"annotation_conflict", g.annotation_conflict}, {"text", g.text}});
    }
    j["duplicate_groups"] = std::move(jg);
    j["entity_stats"] = stats_to_json(stats);
    try {
      write_json_file(*opts.json_out, j);
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitInputError;
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// translate / transfer

int cmd_translate(const BatchOptions& opts, const PipelineConfig& cfg, ChatTransport& chat,
                  std::ostream& out, std::ostream& err) {
  std::vector<SentenceRecord> records;
  try {
    cfg.validate();
    records = read_jsonl(opts.input);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  const PromptTemplate tmpl = default_template(cfg.translate_template);
  const RetryPolicy policy = cfg.retry_policy();
  try {
    return run_batch(
        opts, cfg, records, records, "translate",
        [&](const SentenceRecord& r, BatchState& state) {
          SentenceRecord src = r;
          src.text_rus.reset();
          src.spans_rus.reset();
          int attempts = 0;
          SentenceRecord done = translate_record(src, chat, tmpl, policy, &attempts);
          state.success(done, attempts);
        },
        [](SentenceRecord& r) {
          r.text_rus.reset();
          r.spans_rus.reset();
        },
        out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

int cmd_transfer(const BatchOptions& opts, const PipelineConfig& cfg, ChatTransport& chat,
                 std::ostream& out, std::ostream& err) {
  std::vector<SentenceRecord> records;
  try {
    cfg.validate();
    records = read_jsonl(opts.input);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  std::vector<std::string> missing;
  std::vector<SentenceRecord> todo;
  for (auto& r : records) {
    if (!r.text_rus) {
      missing.push_back(r.id);
    } else if (!r.spans.empty()) {
      todo.push_back(r);
    }
  }
  if (!missing.empty()) {
    err << "error: " << missing.size() << " record(s) lack text_rus; run translate first:";
    for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 10); ++i) err << ' ' << missing[i];
    err << (missing.size() > 10 ? " ..." : "") << '\n';
    return kExitInputError;
  }

  const std::filesystem::path diagnostics =
      opts.diagnostics.value_or(with_suffix(opts.output, ".diagnostics.jsonl"));
  const PromptSet prompts;
  const RetryPolicy policy = cfg.retry_policy();
  std::size_t unresolved_total = 0;
  std::mutex diag_mu;
  try {
    return run_batch(
        opts, cfg, records, todo, "transfer",
        [&](const SentenceRecord& r, BatchState& state) {
          SentenceRecord src = r;
          src.spans_rus.reset();
          TransferOutcome o = transfer_record(src, chat, prompts, cfg.transfer, policy);
          {
            std::lock_guard lock(diag_mu);
            for (const auto& u : o.unresolved) {
              Json d{{"record_id", r.id},
                     {"span_id", u.span_id},
                     {"reason", u.reason},
                     {"needle", u.needle},
                     {"best_score", u.best_score ? Json(*u.best_score) : Json(nullptr)}};
              append_line(diagnostics, d.dump());
            }
            unresolved_total += o.unresolved.size();
          }
          state.success(o.record, o.attempts);
        },
        [](SentenceRecord& r) {
          if (r.spans.empty()) {
            r.spans_rus.emplace();
          } else {
            r.spans_rus.reset();
          }
        },
        out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

// ---------------------------------------------------------------------------
// evaluation

int cmd_eval_transfer(const EvalTransferOptions& opts, std::ostream& out, std::ostream& err) {
  TransferReport report;
  try {
    report = transfer_report(read_jsonl(opts.gold), read_jsonl(opts.sys));
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  if (!report.missing_records.empty()) {
    err << "warning: " << report.missing_records.size()
        << " gold record(s) have no system counterpart; their spans count as unhandled\n";
  }
  out << format_transfer_table({{"System", report}});
  if (opts.json_out) {
    try {
      write_json_file(*opts.json_out, transfer_report_to_json(report));
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitInputError;
    }
  }
  return kExitOk;
}

int cmd_eval_translation(const EvalTranslationOptions& opts, EmbeddingTransport* embedder,
                         std::ostream& out, std::ostream& err) {
  TranslationScores scores;
  try {
    const auto gold = read_jsonl(opts.gold);
    const auto sys = read_jsonl(opts.sys);
    std::map<std::string_view, const SentenceRecord*> by_id;
    for (const auto& r : sys) by_id.emplace(r.id, &r);

    std::vector<std::string> en, gold_ru, sys_ru;
    std::size_t unpaired = 0;
    for (const auto& g : gold) {
      if (!g.text_rus) continue;
      auto it = by_id.find(g.id);
      if (it == by_id.end() || !it->second->text_rus) {
        ++unpaired;
        continue;
      }
      en.push_back(g.text);
      gold_ru.push_back(*g.text_rus);
      sys_ru.push_back(*it->second->text_rus);
    }
    if (unpaired) {
      throw LengthMismatch(std::to_string(unpaired) +
                           " gold translation(s) have no system translation with the same id");
    }
    scores.bleu = bleu(sys_ru, gold_ru, opts.bleu);

    if (opts.bleu_only || !embedder) {
      err << "notice: embedding metrics skipped"
          << (opts.bleu_only ? " (--bleu-only)" : " (no embedding endpoint)") << '\n';
      if (!opts.bleu_only) {
        err << "error: no embedding endpoint configured; pass --bleu-only to skip it\n";
        return kExitInputError;
      }
    } else {
      const auto e_en = stack_rows(embed(*embedder, en, opts.batch_size));
      const auto e_gold = stack_rows(embed(*embedder, gold_ru, opts.batch_size));
      const auto e_sys = stack_rows(embed(*embedder, sys_ru, opts.batch_size));
      scores.bleu_like = bleu_like_metric(e_gold, e_sys, opts.distance);
      scores.parallel_comparison = parallel_comparison(e_en, e_gold, e_sys, opts.distance);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  out << format_translation_table(scores);
  if (opts.json_out) {
    try {
      write_json_file(*opts.json_out, translation_scores_to_json(scores));
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitInputError;
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// export

int cmd_export(const ExportOptions& opts, std::ostream& out, std::ostream& err) {
  std::vector<SentenceRecord> records;
  try {
    records = read_jsonl(opts.input);
    std::filesystem::create_directories(opts.out_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  std::map<std::string, std::vector<ConllSentence>> files;
  std::size_t skipped = 0;
  for (const auto& r : records) {
    try {
      files[file_key(r.id)].push_back(record_to_bio(r, opts.side));
    } catch (const OverlappingSpans& e) {
      err << "warning: skipping " << r.id << ": " << e.what() << '\n';
      ++skipped;
    } catch (const MissingField& e) {
      err << "warning: skipping " << r.id << ": " << e.what() << '\n';
      ++skipped;
    }
  }
  std::size_t sentences = 0;
  for (const auto& [key, list] : files) {
    std::ostringstream os;
    write_conll(os, list);
    try {
      write_file_atomic(opts.out_dir / (key + ".conll"), os.str());
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitInputError;
    }
    sentences += list.size();
  }
  out << "exported " << sentences << " sentences to " << files.size() << " file(s) in "
      << opts.out_dir.string() << ", skipped " << skipped << '\n';
  return kExitOk;
}

}  // namespace annobridge
