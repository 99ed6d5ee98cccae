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

#ifndef ANNOBRIDGE_MOCK_LLM_HPP_
#define ANNOBRIDGE_MOCK_LLM_HPP_

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "annobridge/gateway.hpp"

namespace annobridge {

// What the mock does on one call for a given record id.
enum class MockStep {
  EchoGold,    // answer with the gold text_rus / spans_rus
  CopySource,  // translation requests: echo the source text as text_rus
  Fail,        // HTTP 503
  RateLimit,   // HTTP 429
  AuthFail,    // HTTP 401
  EmitCode,    // a fenced code block instead of JSON
  Prose,       // an apology with no JSON
  Fixed,       // the literal `fixed` text
};

struct MockAction {
  MockStep step = MockStep::EchoGold;
  std::string fixed;
};

// Per-id action sequences. The i-th call for an id plays the i-th action;
// the last action repeats. Ids without an entry use `fallback`; with no
// fallback they raise UnknownId.
struct MockScript {
  std::map<std::string, std::vector<MockAction>> by_id;
  std::vector<MockAction> fallback;
  std::map<std::string, SentenceRecord> gold;

  static MockScript echo_gold(const std::vector<SentenceRecord>& gold);
  static std::vector<MockAction> fail_n_times(int n);

  // {"default": [...], "ids": {"<id>": [...]}} where each step is one of
  // "echo-gold", "copy-source", "fail", "rate-limit", "auth-fail",
  // "emit-code", "prose", {"fixed": "..."} or {"fail-n-times": n}.
  static MockScript from_json(const Json& j, const std::vector<SentenceRecord>& gold);
};

class UnknownId : public Error {
 public:
  explicit UnknownId(const std::string& id) : Error("mock has no script for id '" + id + "'") {}
};

// Offline, deterministic stand-in for a chat-completions endpoint.
class MockChatTransport : public ChatTransport {
 public:
  explicit MockChatTransport(MockScript script);

  ChatReply send(const Json& body) override;
  std::string model() const override { return "mock"; }

  std::size_t calls() const { return calls_.load(); }
  std::size_t calls_for(const std::string& id) const;

 private:
  MockScript script_;
  std::atomic<std::size_t> calls_{0};
  mutable std::mutex mu_;
  std::map<std::string, std::size_t> per_id_;
};

std::unique_ptr<MockChatTransport> mock_llm(MockScript script);

}  // namespace annobridge

#endif  // ANNOBRIDGE_MOCK_LLM_HPP_
