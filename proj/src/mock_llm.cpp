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

#include "annobridge/mock_llm.hpp"

#include <stdexcept>

namespace annobridge {
namespace {

constexpr const char* kCodeReply =
    "```python\n"
    "def transfer_spans(record):\n"
    "    result = []\n"
    "    for start, end, label, span_id, text in record[\"spans\"]:\n"
    "        result.append([label, span_id, record[\"text_rus\"][start:end]])\n"
    "    return result\n"
    "```";

constexpr const char* kProseReply =
    "I am sorry, but I cannot determine the corresponding Russian text for these spans.";

MockAction parse_step(const Json& s) {
  if (s.is_string()) {
    const auto name = s.get<std::string>();
    if (name == "echo-gold") return {MockStep::EchoGold, {}};
    if (name == "copy-source") return {MockStep::CopySource, {}};
    if (name == "fail") return {MockStep::Fail, {}};
    if (name == "rate-limit") return {MockStep::RateLimit, {}};
    if (name == "auth-fail") return {MockStep::AuthFail, {}};
    if (name == "emit-code") return {MockStep::EmitCode, {}};
    if (name == "prose") return {MockStep::Prose, {}};
    throw Error("unknown mock step '" + name + "'");
  }
  if (s.is_object() && s.contains("fixed") && s["fixed"].is_string()) {
    return {MockStep::Fixed, s["fixed"].get<std::string>()};
  }
  throw Error("unrecognized mock step " + s.dump());
}

std::vector<MockAction> parse_steps(const Json& j) {
  std::vector<MockAction> out;
  const Json list = j.is_array() ? j : Json::array({j});
  for (const auto& s : list) {
    if (s.is_object() && s.contains("fail-n-times")) {
      for (const auto& a : MockScript::fail_n_times(s["fail-n-times"].get<int>())) out.push_back(a);
    } else {
      out.push_back(parse_step(s));
    }
  }
  if (out.empty()) throw Error("empty mock step list");
  return out;
}

}  // namespace

MockScript MockScript::echo_gold(const std::vector<SentenceRecord>& gold) {
  MockScript s;
  s.fallback = {{MockStep::EchoGold, {}}};
  for (const auto& r : gold) s.gold[r.id] = r;
  return s;
}

std::vector<MockAction> MockScript::fail_n_times(int n) {
  std::vector<MockAction> out(static_cast<std::size_t>(std::max(n, 0)), {MockStep::Fail, {}});
  out.push_back({MockStep::EchoGold, {}});
  return out;
}

MockScript MockScript::from_json(const Json& j, const std::vector<SentenceRecord>& gold) {
  MockScript s;
  for (const auto& r : gold) s.gold[r.id] = r;
  if (j.contains("default")) s.fallback = parse_steps(j["default"]);
  if (j.contains("ids")) {
    for (const auto& [id, steps] : j["ids"].items()) s.by_id[id] = parse_steps(steps);
  }
  return s;
}

MockChatTransport::MockChatTransport(MockScript script) : script_(std::move(script)) {}

std::size_t MockChatTransport::calls_for(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = per_id_.find(id);
  return it == per_id_.end() ? 0 : it->second;
}

ChatReply MockChatTransport::send(const Json& body) {
  ++calls_;
  const auto& messages = body.at("messages");
  const Json input = Json::parse(messages.back().at("content").get<std::string>());
  const std::string id = input.at("id").get<std::string>();

  std::size_t call_index = 0;
  {
    std::lock_guard lock(mu_);
    call_index = per_id_[id]++;
  }
  const std::vector<MockAction>* steps = nullptr;
  if (auto it = script_.by_id.find(id); it != script_.by_id.end()) {
    steps = &it->second;
  } else if (!script_.fallback.empty()) {
    steps = &script_.fallback;
  } else {
    throw UnknownId(id);
  }
  const MockAction& action = (*steps)[std::min(call_index, steps->size() - 1)];

  const bool transfer = input.contains("spans") && input.contains("text_rus");
  Json out = input;
  switch (action.step) {
    case MockStep::Fail:
      throw TransportError(503, "mock: service unavailable");
    case MockStep::RateLimit:
      throw RateLimited("mock: rate limited");
    case MockStep::AuthFail:
      throw AuthError(401, "mock: unauthorized");
    case MockStep::EmitCode:
      return {kCodeReply, {}};
    case MockStep::Prose:
      return {kProseReply, {}};
    case MockStep::Fixed:
      return {action.fixed, {}};
    case MockStep::CopySource:
      if (transfer) {
        Json rus = Json::array();
        for (const auto& s : input["spans"]) rus.push_back(Json::array({s[2], s[3], s[4]}));
        out["spans_rus"] = std::move(rus);
      } else {
        out["text_rus"] = input["text"];
      }
      return {out.dump(), {}};
    case MockStep::EchoGold:
      break;
  }

  const auto g = script_.gold.find(id);
  if (g == script_.gold.end()) throw UnknownId(id);
  if (transfer) {
    if (!g->second.spans_rus) throw UnknownId(id);
    Json rus = Json::array();
    for (const auto& s : input["spans"]) {
      const auto span_id = s[3].get<std::string>();
      for (const auto& gs : *g->second.spans_rus) {
        if (gs.span_id == span_id) {
          rus.push_back(Json::array({gs.label, gs.span_id, gs.surface}));
          break;
        }
      }
    }
    out["spans_rus"] = std::move(rus);
  } else {
    if (!g->second.text_rus) throw UnknownId(id);
    out["text_rus"] = *g->second.text_rus;
  }
  return {out.dump(), {}};
}

std::unique_ptr<MockChatTransport> mock_llm(MockScript script) {
  return std::make_unique<MockChatTransport>(std::move(script));
}

}  // namespace annobridge
