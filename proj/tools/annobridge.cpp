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

// annobridge: convert, audit, translate, transfer, evaluate and export
// span-annotated corpora.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "annobridge/jsonl.hpp"
#include "annobridge/mock_llm.hpp"
#include "annobridge/pipeline.hpp"

namespace ab = annobridge;

namespace {

struct Globals {
  std::string config;
  std::size_t workers = 0;
  bool mock = false;
  std::string mock_script;
  std::uint64_t seed = 0;
};

ab::PipelineConfig load_config(const Globals& g) {
  ab::PipelineConfig cfg = g.config.empty() ? ab::PipelineConfig{} : ab::PipelineConfig::load(g.config);
  if (g.workers > 0) cfg.workers = g.workers;
  cfg.validate();
  return cfg;
}

// Mock transport scripted from the input records: echo their gold
// annotations, or copy the source side for records lacking the annotation
// the command produces.
std::unique_ptr<ab::MockChatTransport> make_mock(const Globals& g, const std::string& input,
                                                 bool transfer) {
  const auto records = ab::read_jsonl(input);
  if (!g.mock_script.empty()) {
    std::ifstream in(g.mock_script);
    if (!in) throw ab::IoError("cannot open mock script " + g.mock_script);
    return ab::mock_llm(ab::MockScript::from_json(ab::Json::parse(in), records));
  }
  ab::MockScript script = ab::MockScript::echo_gold(records);
  for (const auto& r : records) {
    if (transfer ? !r.spans_rus : !r.text_rus) script.by_id[r.id] = {ab::MockAction{ab::MockStep::CopySource, {}}};
  }
  return ab::mock_llm(std::move(script));
}

int run_batch_command(const Globals& g, const ab::BatchOptions& opts, bool transfer) {
  ab::PipelineConfig cfg;
  std::unique_ptr<ab::ChatTransport> transport;
  try {
    cfg = load_config(g);
    if (g.mock || !g.mock_script.empty()) {
      transport = make_mock(g, opts.input.string(), transfer);
    } else {
      cfg.chat.api_key = ab::Endpoint::api_key_from_env();
      if (cfg.chat.base_url.empty() || cfg.chat.model.empty()) {
        throw ab::Error("chat.base_url and chat.model must be set in --config (or use --mock)");
      }
      transport = std::make_unique<ab::HttpChatTransport>(cfg.chat);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ab::kExitInputError;
  }
  std::unique_ptr<ab::TranscriptTransport> transcript;
  ab::ChatTransport* chat = transport.get();
  if (cfg.transcript) {
    transcript = std::make_unique<ab::TranscriptTransport>(*transport, *cfg.transcript);
    chat = transcript.get();
  }
  return transfer ? ab::cmd_transfer(opts, cfg, *chat, std::cout, std::cerr)
                  : ab::cmd_translate(opts, cfg, *chat, std::cout, std::cerr);
}

void add_batch_options(CLI::App* cmd, ab::BatchOptions& o, std::optional<std::size_t>& limit) {
  cmd->add_option("--in", o.input, "Input JSONL records")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.output, "Output JSONL records")->required();
  cmd->add_option("--ledger", o.ledger, "Ledger path (default <out>.ledger.jsonl)");
  cmd->add_option("--limit", limit, "Process at most this many pending records");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-lingual span annotation transfer toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON configuration file");
  app.add_option("--workers", g.workers, "Concurrent requests");
  app.add_flag("--mock", g.mock, "Use the offline mock LLM and embedder");
  app.add_option("--mock-script", g.mock_script, "JSON script for the mock LLM");
  app.add_option("--seed", g.seed, "Seed for the mock embedder");

  int code = ab::kExitOk;

  ab::ConvertOptions convert;
  auto* c = app.add_subcommand("convert", "CoNLL corpus to JSONL records");
  c->add_option("--corpus", convert.corpus, "CoNLL file or directory")->required();
  c->add_option("--out", convert.out, "Output JSONL")->required();
  c->add_flag("--repair-bio", convert.repair_bio, "Repair BIO violations instead of skipping");
  c->callback([&] { code = ab::cmd_convert(convert, std::cout, std::cerr); });

  ab::AuditOptions audit;
  std::string audit_json;
  auto* a = app.add_subcommand("audit", "Duplicates, BIO violations and label statistics");
  a->add_option("--in", audit.input, "JSONL records or a CoNLL file/directory")->required();
  a->add_option("--json", audit_json, "Also write the report as JSON");
  a->add_option("--show-groups", audit.show_groups, "Duplicate groups to list");
  a->callback([&] {
    if (!audit_json.empty()) audit.json_out = audit_json;
    code = ab::cmd_audit(audit, std::cout, std::cerr);
  });

  ab::BatchOptions translate;
  std::optional<std::size_t> translate_limit;
  auto* t = app.add_subcommand("translate", "Fill text_rus with machine translations");
  add_batch_options(t, translate, translate_limit);
  t->callback([&] {
    translate.limit = translate_limit;
    code = run_batch_command(g, translate, false);
  });

  ab::BatchOptions transfer;
  std::optional<std::size_t> transfer_limit;
  auto* x = app.add_subcommand("transfer", "Project source spans onto text_rus");
  add_batch_options(x, transfer, transfer_limit);
  x->add_option("--diagnostics", transfer.diagnostics,
                "Unresolved span log (default <out>.diagnostics.jsonl)");
  x->callback([&] {
    transfer.limit = transfer_limit;
    code = run_batch_command(g, transfer, true);
  });

  ab::EvalTransferOptions eval_transfer;
  std::string et_json;
  auto* et = app.add_subcommand("eval-transfer", "Compare transferred spans to gold");
  et->add_option("--gold", eval_transfer.gold)->required()->check(CLI::ExistingFile);
  et->add_option("--sys", eval_transfer.sys)->required()->check(CLI::ExistingFile);
  et->add_option("--json", et_json, "Also write the report as JSON");
  et->callback([&] {
    if (!et_json.empty()) eval_transfer.json_out = et_json;
    code = ab::cmd_eval_transfer(eval_transfer, std::cout, std::cerr);
  });

  ab::EvalTranslationOptions eval_tr;
  std::string tr_json;
  std::string distance = "cosine";
  auto* ev = app.add_subcommand("eval-translation", "BLEU and embedding-based scores");
  ev->add_option("--gold", eval_tr.gold)->required()->check(CLI::ExistingFile);
  ev->add_option("--sys", eval_tr.sys)->required()->check(CLI::ExistingFile);
  ev->add_option("--json", tr_json, "Also write the scores as JSON");
  ev->add_flag("--bleu-only", eval_tr.bleu_only, "Skip the embedding metrics");
  ev->add_flag("--smooth", eval_tr.bleu.add_one_smoothing, "Add-one smoothing for n >= 2");
  ev->add_option("--distance", distance)->check(CLI::IsMember({"cosine", "euclidean"}));
  ev->callback([&] {
    if (!tr_json.empty()) eval_tr.json_out = tr_json;
    eval_tr.distance = distance == "euclidean" ? ab::DistanceKind::Euclidean : ab::DistanceKind::Cosine;
    std::unique_ptr<ab::EmbeddingTransport> embedder;
    if (!eval_tr.bleu_only) {
      try {
        const ab::PipelineConfig cfg = load_config(g);
        eval_tr.batch_size = cfg.embed_batch_size;
        if (g.mock) {
          embedder = std::make_unique<ab::MockEmbeddingTransport>(64, g.seed);
        } else if (!cfg.embedding.base_url.empty()) {
          ab::Endpoint ep = cfg.embedding;
          ep.api_key = ab::Endpoint::api_key_from_env();
          embedder = std::make_unique<ab::HttpEmbeddingTransport>(ep);
        }
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        code = ab::kExitInputError;
        return;
      }
    }
    code = ab::cmd_eval_translation(eval_tr, embedder.get(), std::cout, std::cerr);
  });

  ab::ExportOptions exp;
  std::string side = "target";
  auto* e = app.add_subcommand("export", "JSONL records to per-document CoNLL files");
  e->add_option("--in", exp.input)->required()->check(CLI::ExistingFile);
  e->add_option("--out-dir", exp.out_dir)->required();
  e->add_option("--side", side)->check(CLI::IsMember({"source", "target"}));
  e->callback([&] {
    exp.side = side == "source" ? ab::Side::Source : ab::Side::Target;
    code = ab::cmd_export(exp, std::cout, std::cerr);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? ab::kExitOk : ab::kExitInputError;
  }
  return code;
}
