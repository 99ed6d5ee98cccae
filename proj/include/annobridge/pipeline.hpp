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

#ifndef ANNOBRIDGE_PIPELINE_HPP_
#define ANNOBRIDGE_PIPELINE_HPP_

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "annobridge/embedding.hpp"
#include "annobridge/gateway.hpp"
#include "annobridge/ledger.hpp"
#include "annobridge/metrics.hpp"
#include "annobridge/transfer.hpp"

// Library side of the command-line tool. Each cmd_* function returns the
// process exit code and writes human-readable output to `out`, warnings
// and errors to `err`.
namespace annobridge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitPartialFailure = 2;

struct PipelineConfig {
  Endpoint chat;
  Endpoint embedding;
  std::size_t embed_batch_size = 32;
  PromptKind translate_template = PromptKind::Translate2;
  TransferConfig transfer;
  int max_attempts = kDefaultMaxAttempts;
  std::chrono::milliseconds backoff_base{500};
  std::size_t workers = 1;
  std::optional<std::filesystem::path> transcript;

  // Overlays the keys present in `j` onto the defaults. Throws Error on
  // unknown keys or bad values.
  static PipelineConfig from_json(const Json& j);
  static PipelineConfig load(const std::filesystem::path& path);
  void validate() const;
  RetryPolicy retry_policy() const;
};

struct ConvertOptions {
  std::filesystem::path corpus;  // a file or a directory of files
  std::filesystem::path out;
  bool repair_bio = false;
};

// Sentences with BIO violations are skipped (with a warning) unless
// repair_bio is set. Exit 1 when any file fails to parse; nothing is
// written in that case.
int cmd_convert(const ConvertOptions& opts, std::ostream& out, std::ostream& err);

struct AuditOptions {
  std::filesystem::path input;  // JSONL records, or a CoNLL file/directory
  std::optional<std::filesystem::path> json_out;
  std::size_t show_groups = 20;
};

int cmd_audit(const AuditOptions& opts, std::ostream& out, std::ostream& err);

struct BatchOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  std::optional<std::filesystem::path> ledger;       // default: <output>.ledger.jsonl
  std::optional<std::filesystem::path> diagnostics;  // default: <output>.diagnostics.jsonl
  std::optional<std::size_t> limit;                  // stop after this many records
};

// Completed results accumulate in <output>.partial.jsonl next to the
// ledger, so an interrupted run resumes where it stopped. The final output
// holds every input record; records without a result this run or earlier
// are written without text_rus / spans_rus.
int cmd_translate(const BatchOptions& opts, const PipelineConfig& cfg, ChatTransport& chat,
                  std::ostream& out, std::ostream& err);
int cmd_transfer(const BatchOptions& opts, const PipelineConfig& cfg, ChatTransport& chat,
                 std::ostream& out, std::ostream& err);

struct EvalTransferOptions {
  std::filesystem::path gold;
  std::filesystem::path sys;
  std::optional<std::filesystem::path> json_out;
};

int cmd_eval_transfer(const EvalTransferOptions& opts, std::ostream& out, std::ostream& err);

struct EvalTranslationOptions {
  std::filesystem::path gold;
  std::filesystem::path sys;
  std::optional<std::filesystem::path> json_out;
  bool bleu_only = false;
  BleuOptions bleu;
  DistanceKind distance = DistanceKind::Cosine;
  std::size_t batch_size = 32;
};

// `embedder` may be null only with bleu_only.
int cmd_eval_translation(const EvalTranslationOptions& opts, EmbeddingTransport* embedder,
                         std::ostream& out, std::ostream& err);

struct ExportOptions {
  std::filesystem::path input;
  std::filesystem::path out_dir;
  Side side = Side::Target;
};

// One CoNLL file per source document (the id prefix before ':').
int cmd_export(const ExportOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace annobridge

#endif  // ANNOBRIDGE_PIPELINE_HPP_
