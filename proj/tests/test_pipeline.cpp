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

#include <fstream>
#include <sstream>

#include "annobridge/jsonl.hpp"
#include "annobridge/mock_llm.hpp"
#include "annobridge/pipeline.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace annobridge;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = ANNOBRIDGE_FIXTURES;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json load_json(const fs::path& p) { return Json::parse(slurp(p)); }

PipelineConfig fast_config() {
  PipelineConfig cfg;
  cfg.backoff_base = std::chrono::milliseconds(0);
  return cfg;
}

std::vector<SentenceRecord> without_translation(std::vector<SentenceRecord> rs) {
  for (auto& r : rs) {
    r.text_rus.reset();
    r.spans_rus.reset();
  }
  return rs;
}

}  // namespace

TEST_CASE("config overlays keys and rejects unknown ones") {
  const auto c = PipelineConfig::from_json(Json::parse(R"({
      "chat": {"base_url": "http://localhost:8000/v1", "model": "m", "timeout_s": 5},
      "embedding": {"base_url": "http://localhost:8001/v1", "model": "e", "batch_size": 8},
      "translate_template": "translate1",
      "transfer": {"fuzzy_threshold": 0.3, "occurrence_policy": "leftmost"},
      "max_attempts": 2, "backoff_ms": 10, "workers": 4})"));
  CHECK(c.chat.model == "m");
  CHECK(c.chat.timeout == std::chrono::seconds(5));
  CHECK(c.embed_batch_size == 8);
  CHECK(c.translate_template == PromptKind::Translate1);
  CHECK(c.transfer.fuzzy_threshold == 0.3);
  CHECK(c.transfer.occurrence_policy == OccurrencePolicy::Leftmost);
  CHECK(c.retry_policy().max_attempts == 2);
  CHECK(c.workers == 4);
  CHECK(c.chat.api_key.empty());  // never read from the file
  CHECK_THROWS_AS(PipelineConfig::from_json(Json::parse(R"({"api_key": "x"})")), Error);
  CHECK_THROWS_AS(PipelineConfig::from_json(Json::parse(R"({"transfer": {"fuzzy_threshold": 1.0}})")), Error);
  CHECK_THROWS_AS(PipelineConfig::from_json(Json::parse(R"({"workers": 0})")), Error);
  CHECK_THROWS_AS(PipelineConfig::from_json(Json::parse(R"({"translate_template": "transfer"})")), Error);
}

TEST_CASE("convert skips or repairs BIO violations") {
  testing::TempDir tmp;
  std::ostringstream out, err;
  CHECK(cmd_convert({kFixtures / "deft_mini", tmp / "skip.jsonl", false}, out, err) == kExitOk);
  CHECK(read_jsonl(tmp / "skip.jsonl").size() == 4);
  CHECK(err.str().find("IStart") != std::string::npos);
  CHECK(out.str().find("1 skipped") != std::string::npos);

  CHECK(cmd_convert({kFixtures / "deft_mini", tmp / "fix.jsonl", true}, out, err) == kExitOk);
  const auto fixed = read_jsonl(tmp / "fix.jsonl");
  REQUIRE(fixed.size() == 5);
  CHECK(fixed[4].spans.at(0).surface == "enzyme");

  std::ofstream(tmp / "broken.deft") << "a\tb\n";
  CHECK(cmd_convert({tmp / "broken.deft", tmp / "x.jsonl", false}, out, err) == kExitInputError);
  CHECK_FALSE(fs::exists(tmp / "x.jsonl"));
  CHECK(cmd_convert({tmp / "absent", tmp / "x.jsonl", false}, out, err) == kExitInputError);
}

TEST_CASE("audit report matches the golden file") {
  testing::TempDir tmp;
  std::ostringstream out, err;
  CHECK(cmd_audit({kFixtures / "deft_mini", tmp / "audit.json", 20}, out, err) == kExitOk);
  CHECK(out.str().find("2 duplicates in 2 groups (1 with annotation conflict)") != std::string::npos);
  CHECK(out.str().find("[annotation conflict]") != std::string::npos);
  CHECK(load_json(tmp / "audit.json") == load_json(kFixtures / "golden" / "audit.json"));

  // JSONL input without duplicates.
  std::ostringstream out2;
  write_jsonl(tmp / "uniq.jsonl", testing::synthetic_gold_set(5, 1));
  CHECK(cmd_audit({tmp / "uniq.jsonl", {}, 20}, out2, err) == kExitOk);
  CHECK(out2.str().find("0 duplicates") != std::string::npos);
}

TEST_CASE("translate fills text_rus and reports partial failures with exit 2") {
  testing::TempDir tmp;
  const auto gold = testing::synthetic_gold_set(6, 2);
  write_jsonl(tmp / "in.jsonl", without_translation(gold));
  MockScript script = MockScript::echo_gold(gold);
  script.by_id[gold[2].id] = {{MockStep::Fail, {}}};
  script.by_id[gold[4].id] = MockScript::fail_n_times(1);
  auto mock = mock_llm(script);
  auto cfg = fast_config();
  cfg.max_attempts = 2;
  cfg.workers = 3;
  std::ostringstream out, err;
  const BatchOptions opts{tmp / "in.jsonl", tmp / "out.jsonl", {}, {}, {}};
  CHECK(cmd_translate(opts, cfg, *mock, out, err) == kExitPartialFailure);
  const auto result = read_jsonl(tmp / "out.jsonl");
  REQUIRE(result.size() == 6);
  CHECK_FALSE(result[2].text_rus);
  CHECK(result[4].text_rus == gold[4].text_rus);
  CHECK(mock->calls() == 5 + 2 + 1);

  // The failed record was charged one ledger attempt per run; with
  // max_attempts 2 the next failure exhausts it and a third run skips it.
  const Ledger ledger = Ledger::load(tmp / "out.jsonl.ledger.jsonl", 2);
  CHECK(ledger.failures().at(gold[2].id).attempts == 1);
  auto again = mock_llm(script);
  CHECK(cmd_translate(opts, cfg, *again, out, err) == kExitPartialFailure);
  CHECK(again->calls() == 2);
  CHECK(Ledger::load(tmp / "out.jsonl.ledger.jsonl", 2).is_exhausted(gold[2].id));
  auto third = mock_llm(script);
  CHECK(cmd_translate(opts, cfg, *third, out, err) == kExitOk);
  CHECK(third->calls() == 0);
  CHECK(out.str().find("exhausted records: 1") != std::string::npos);
}

TEST_CASE("resume tolerates a torn partial-results line") {
  testing::TempDir tmp;
  const auto gold = testing::synthetic_gold_set(10, 3);
  write_jsonl(tmp / "in.jsonl", without_translation(gold));
  auto cfg = fast_config();
  std::ostringstream out, err;
  auto first = mock_llm(MockScript::echo_gold(gold));
  CHECK(cmd_translate({tmp / "in.jsonl", tmp / "out.jsonl", {}, {}, 4}, cfg, *first, out, err) == 0);
  std::ofstream(tmp / "out.jsonl.partial.jsonl", std::ios::app) << R"({"id":"synthetic_0.deft:9","te)";
  auto second = mock_llm(MockScript::echo_gold(gold));
  CHECK(cmd_translate({tmp / "in.jsonl", tmp / "out.jsonl", {}, {}, {}}, cfg, *second, out, err) == 0);
  CHECK(second->calls() == 6);
  const auto result = read_jsonl(tmp / "out.jsonl");
  for (std::size_t i = 0; i < gold.size(); ++i) CHECK(result[i].text_rus == gold[i].text_rus);
}

TEST_CASE("authentication failure stops the batch with exit 1") {
  testing::TempDir tmp;
  const auto gold = testing::synthetic_gold_set(8, 4);
  write_jsonl(tmp / "in.jsonl", without_translation(gold));
  MockScript script;
  script.fallback = {{MockStep::AuthFail, {}}};
  auto mock = mock_llm(script);
  std::ostringstream out, err;
  CHECK(cmd_translate({tmp / "in.jsonl", tmp / "out.jsonl", {}, {}, {}}, fast_config(), *mock, out,
                      err) == kExitInputError);
  CHECK(mock->calls() == 1);
  CHECK(err.str().find("authentication") != std::string::npos);
}

TEST_CASE("transfer, diagnostics and eval-transfer golden report") {
  testing::TempDir tmp;
  auto gold = testing::synthetic_gold_set(12, 6);
  std::vector<SentenceRecord> input = gold;
  for (auto& r : input) r.spans_rus.reset();
  write_jsonl(tmp / "gold.jsonl", gold);
  write_jsonl(tmp / "in.jsonl", input);

  // One record answers with a surface that is nowhere in the translation.
  MockScript script = MockScript::echo_gold(gold);
  Json bogus = Json::object();
  bogus["spans_rus"] = Json::array();
  for (const auto& s : gold[3].spans) bogus["spans_rus"].push_back({s.label, s.span_id, "zzzzzzzzzz"});
  script.by_id[gold[3].id] = {{MockStep::Fixed, bogus.dump()}};
  auto mock = mock_llm(script);
  std::ostringstream out, err;
  CHECK(cmd_transfer({tmp / "in.jsonl", tmp / "sys.jsonl", {}, {}, {}}, fast_config(), *mock, out,
                     err) == kExitOk);
  const auto sys = read_jsonl(tmp / "sys.jsonl");
  CHECK(sys[3].spans_rus->empty());
  CHECK(sys[0].spans_rus == gold[0].spans_rus);

  std::ifstream diag(tmp / "sys.jsonl.diagnostics.jsonl");
  std::string line;
  std::size_t n = 0;
  while (std::getline(diag, line)) {
    const Json d = Json::parse(line);
    CHECK(d["record_id"] == gold[3].id);
    CHECK(d["needle"] == "zzzzzzzzzz");
    ++n;
  }
  CHECK(n == gold[3].spans.size());

  CHECK(cmd_eval_transfer({tmp / "gold.jsonl", tmp / "sys.jsonl", tmp / "report.json"}, out, err) ==
        kExitOk);
  const Json report = load_json(tmp / "report.json");
  CHECK(report["unhandled"] == gold[3].spans.size());
  CHECK(report["mismatched"] == 0);

  // Golden file on the committed hand-labeled fixture.
  CHECK(cmd_eval_transfer({kFixtures / "transfer_gold.jsonl", kFixtures / "transfer_sys.jsonl",
                           tmp / "fixture.json"},
                          out, err) == kExitOk);
  CHECK(load_json(tmp / "fixture.json") == load_json(kFixtures / "golden" / "eval_transfer.json"));

  // Untranslated input is an input error.
  write_jsonl(tmp / "raw.jsonl", without_translation(gold));
  CHECK(cmd_transfer({tmp / "raw.jsonl", tmp / "x.jsonl", {}, {}, {}}, fast_config(), *mock, out,
                     err) == kExitInputError);
}

TEST_CASE("eval-translation with and without embeddings") {
  testing::TempDir tmp;
  const auto gold = testing::synthetic_gold_set(6, 8);
  write_jsonl(tmp / "gold.jsonl", gold);
  std::ostringstream out, err;
  CHECK(cmd_eval_translation({tmp / "gold.jsonl", tmp / "gold.jsonl", tmp / "s.json", true, {}, {}, 32},
                             nullptr, out, err) == kExitOk);
  CHECK(err.str().find("embedding metrics skipped") != std::string::npos);
  const Json s = load_json(tmp / "s.json");
  CHECK(s["bleu"] == 1.0);
  CHECK(s["bleu_like"].is_null());

  MockEmbeddingTransport emb(16, 1);
  CHECK(cmd_eval_translation({tmp / "gold.jsonl", tmp / "gold.jsonl", tmp / "e.json", false, {}, {}, 4},
                             &emb, out, err) == kExitOk);
  const Json e = load_json(tmp / "e.json");
  CHECK(e["bleu_like"].get<double>() == doctest::Approx(0.0));
  CHECK(e["parallel_comparison"].get<double>() == doctest::Approx(0.0));

  std::ostringstream err2;
  CHECK(cmd_eval_translation({tmp / "gold.jsonl", tmp / "gold.jsonl", {}, false, {}, {}, 4}, nullptr,
                             out, err2) == kExitInputError);

  auto partial = gold;
  partial.pop_back();
  write_jsonl(tmp / "short.jsonl", partial);
  CHECK(cmd_eval_translation({tmp / "gold.jsonl", tmp / "short.jsonl", {}, true, {}, {}, 4}, nullptr,
                             out, err) == kExitInputError);
}

TEST_CASE("export writes per-document CoNLL that re-imports to the same spans") {
  testing::TempDir tmp;
  const auto gold = testing::synthetic_gold_set(150, 9);
  write_jsonl(tmp / "gold.jsonl", gold);
  std::ostringstream out, err;
  CHECK(cmd_export({tmp / "gold.jsonl", tmp / "conll", Side::Target}, out, err) == kExitOk);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(tmp / "conll")) files.push_back(e.path());
  CHECK(files.size() == 2);  // synthetic_0.deft, synthetic_1.deft

  // Sentence ids are re-derived from the file name on import, so pair by
  // document and position.
  std::map<std::string, std::vector<SentenceRecord>> by_doc;
  for (const auto& r : gold) by_doc[r.id.substr(0, r.id.rfind(':'))].push_back(r);
  std::size_t checked = 0;
  for (const auto& f : files) {
    const auto sentences = parse_conll(f);
    const auto& docs = by_doc.at(f.stem().string());
    REQUIRE(sentences.size() == docs.size());
    for (std::size_t k = 0; k < sentences.size(); ++k) {
      const auto back = conll_to_record(sentences[k]);
      const auto& g = docs[k];
      CHECK(back.text == *g.text_rus);
      REQUIRE(back.spans.size() == g.spans_rus->size());
      for (std::size_t i = 0; i < back.spans.size(); ++i) {
        CHECK(back.spans[i].start == (*g.spans_rus)[i].start);
        CHECK(back.spans[i].end == (*g.spans_rus)[i].end);
        CHECK(back.spans[i].label == (*g.spans_rus)[i].label);
        CHECK(back.spans[i].surface == (*g.spans_rus)[i].surface);
      }
      ++checked;
    }
  }
  CHECK(checked == gold.size());

  auto overlapping = gold[0];
  const std::size_t at = overlapping.spans_rus->front().start + 1;
  overlapping.spans_rus->push_back(
      {at, at + 3, "Term", "T9", utf8::slice(*overlapping.text_rus, at, at + 3)});
  write_jsonl(tmp / "ov.jsonl", {overlapping, gold[1]});
  std::ostringstream out2, err2;
  CHECK(cmd_export({tmp / "ov.jsonl", tmp / "ov", Side::Target}, out2, err2) == kExitOk);
  CHECK(err2.str().find(overlapping.id) != std::string::npos);
  CHECK(out2.str().find("skipped 1") != std::string::npos);

  write_jsonl(tmp / "none.jsonl", {});
  CHECK(cmd_export({tmp / "none.jsonl", tmp / "empty", Side::Target}, out, err) == kExitOk);
  CHECK(fs::is_empty(tmp / "empty"));
}
