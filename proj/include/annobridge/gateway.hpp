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

#ifndef ANNOBRIDGE_GATEWAY_HPP_
#define ANNOBRIDGE_GATEWAY_HPP_

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "annobridge/error.hpp"
#include "annobridge/record.hpp"

namespace annobridge {

// ---------------------------------------------------------------------------
// Prompts

enum class PromptKind { TransferSpans, Translate1, Translate2 };

std::string_view to_string(PromptKind kind);
// Accepts "transfer", "translate1", "translate2".
std::optional<PromptKind> prompt_kind_from_string(std::string_view name);

// Verbatim instruction text sent as the system message.
std::string_view prompt_text(PromptKind kind);

struct FewShotExample {
  Json input;
  Json output;
};

struct PromptTemplate {
  PromptKind kind = PromptKind::TransferSpans;
  std::string system_text;
  std::vector<FewShotExample> few_shot;
};

// Instruction text plus two built-in bilingual examples.
PromptTemplate default_template(PromptKind kind);

// ---------------------------------------------------------------------------
// Chat exchange

struct ChatMessage {
  std::string role;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct TokenUsage {
  long prompt_tokens = 0;
  long completion_tokens = 0;
  long total_tokens = 0;
};

struct ChatExchange {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  std::string raw_response;
  TokenUsage usage;
  int attempts = 0;
};

// The JSON object the model sees for `r`: {id, text, text_rus?, spans?}.
// Throws MissingField when the template needs a field the record lacks.
Json request_input(const PromptTemplate& t, const SentenceRecord& r);

// System message, few-shot user/assistant turns, then the record itself.
ChatExchange render_prompt(const PromptTemplate& t, const SentenceRecord& r);

// {model, messages, temperature}
Json request_body(const ChatExchange& exchange);

// ---------------------------------------------------------------------------
// Transport

struct Endpoint {
  std::string base_url;  // e.g. "https://api.openai.com/v1"
  std::string api_key;
  std::string model;
  std::chrono::seconds timeout{120};

  // Value of ANNOBRIDGE_API_KEY, or empty.
  static std::string api_key_from_env();
};

class TransportError : public Error {
 public:
  TransportError(int status, const std::string& what)
      : Error(what), status_(status) {}
  // HTTP status, 0 for connection-level failures.
  int status() const { return status_; }

 private:
  int status_;
};

class AuthError : public TransportError {
 public:
  using TransportError::TransportError;
};

class RateLimited : public TransportError {
 public:
  explicit RateLimited(const std::string& what) : TransportError(429, what) {}
};

// POSTs `body` to base_url + route and parses the JSON reply. 401/403 raise
// AuthError, 429 RateLimited, any other failure TransportError.
Json post_json(const Endpoint& endpoint, std::string_view route, const Json& body);

struct ChatReply {
  std::string content;
  TokenUsage usage;
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual ChatReply send(const Json& body) = 0;
  virtual std::string model() const { return {}; }
};

// OpenAI-compatible POST <base_url>/chat/completions.
class HttpChatTransport : public ChatTransport {
 public:
  explicit HttpChatTransport(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  ChatReply send(const Json& body) override;
  std::string model() const override { return endpoint_.model; }

 private:
  Endpoint endpoint_;
};

// Appends {request, response | error} per call to a JSONL audit file.
class TranscriptTransport : public ChatTransport {
 public:
  TranscriptTransport(ChatTransport& inner, std::filesystem::path path)
      : inner_(inner), path_(std::move(path)) {}
  ChatReply send(const Json& body) override;
  std::string model() const override { return inner_.model(); }

 private:
  ChatTransport& inner_;
  std::filesystem::path path_;
  std::mutex mu_;
};

// ---------------------------------------------------------------------------
// Response handling

// Raised by response validators; chat() retries on it.
class ResponseError : public Error {
 public:
  using Error::Error;
};
class NoJsonFound : public ResponseError {
 public:
  using ResponseError::ResponseError;
};
class TrailingGarbage : public ResponseError {
 public:
  using ResponseError::ResponseError;
};
class CountMismatch : public ResponseError {
 public:
  using ResponseError::ResponseError;
};
class IdMismatch : public ResponseError {
 public:
  using ResponseError::ResponseError;
};
class LabelMismatch : public ResponseError {
 public:
  using ResponseError::ResponseError;
};
class MalformedResponse : public ResponseError {
 public:
  using ResponseError::ResponseError;
};

class Exhausted : public Error {
 public:
  Exhausted(int attempts, std::string last_error)
      : Error("gave up after " + std::to_string(attempts) + " attempts: " + last_error),
        attempts_(attempts),
        last_error_(std::move(last_error)) {}
  int attempts() const { return attempts_; }
  const std::string& last_error() const { return last_error_; }

 private:
  int attempts_;
  std::string last_error_;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_max{30000};
  // Throws ResponseError (or any Error) to reject a reply.
  std::function<void(const std::string&)> validator;
  // Defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;

  std::chrono::milliseconds delay_before(int attempt) const;
};

// Sends the exchange until a reply passes the validator. Transport failures
// and rejected replies are retried with exponential backoff; AuthError is
// not. Throws Exhausted after max_attempts.
ChatExchange chat(ChatTransport& transport, ChatExchange exchange,
                  const RetryPolicy& policy);

struct ExtractOptions {
  // Trailing prose after the object is rejected unless set.
  bool allow_trailing_prose = false;
};

// Isolates the single JSON object in a model reply, ignoring code fences and
// leading prose. Throws NoJsonFound or TrailingGarbage.
Json extract_json(std::string_view response_text, ExtractOptions options = {});

struct RawRusSpan {
  std::string label;
  std::string span_id;
  std::string surface;

  bool operator==(const RawRusSpan&) const = default;
};

// spans_rus must pair one-to-one with the request spans as
// [label, id, surface]. Throws CountMismatch, IdMismatch, LabelMismatch or
// MalformedResponse. Surfaces are returned with outer whitespace trimmed.
std::vector<RawRusSpan> validate_transfer_response(const SentenceRecord& request,
                                                   const Json& parsed);

// Returns the non-empty text_rus of a translation reply.
std::string validate_translate_response(const SentenceRecord& request,
                                        const Json& parsed);

}  // namespace annobridge

#endif  // ANNOBRIDGE_GATEWAY_HPP_
