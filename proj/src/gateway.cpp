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

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "annobridge/gateway.hpp"
#include "annobridge/jsonl.hpp"

namespace annobridge {
namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

// Index of the brace closing the object opened at `open`, or npos.
std::size_t match_object(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i;
    }
  }
  return std::string_view::npos;
}

struct Located {
  Json value;
  std::size_t begin;
  std::size_t end;  // one past the closing brace
};

std::optional<Located> first_object(std::string_view s) {
  for (auto pos = s.find('{'); pos != std::string_view::npos; pos = s.find('{', pos + 1)) {
    const auto close = match_object(s, pos);
    if (close == std::string_view::npos) continue;
    Json j = Json::parse(s.substr(pos, close - pos + 1), nullptr, false);
    if (!j.is_discarded() && j.is_object()) return Located{std::move(j), pos, close + 1};
  }
  return std::nullopt;
}

std::string strip_fences(std::string_view text) {
  std::string out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = text.substr(pos, nl - pos);
    if (!trim(line).starts_with("```")) {
      out.append(line);
      out.push_back('\n');
    }
    pos = nl + 1;
  }
  return out;
}

std::string id_of(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return v.dump();
  throw MalformedResponse("span id is neither string nor integer");
}

}  // namespace

Json request_input(const PromptTemplate& t, const SentenceRecord& r) {
  Json j = Json::object();
  j["id"] = r.id;
  j["text"] = r.text;
  if (t.kind == PromptKind::TransferSpans) {
    if (!r.text_rus) throw MissingField("text_rus");
    j["text_rus"] = *r.text_rus;
    Json spans = Json::array();
    for (const auto& s : r.spans) {
      spans.push_back(Json::array({s.start, s.end, s.label, s.span_id, s.surface}));
    }
    j["spans"] = std::move(spans);
  }
  return j;
}

ChatExchange render_prompt(const PromptTemplate& t, const SentenceRecord& r) {
  ChatExchange ex;
  ex.messages.push_back({"system", t.system_text});
  for (const auto& shot : t.few_shot) {
    ex.messages.push_back({"user", shot.input.dump()});
    ex.messages.push_back({"assistant", shot.output.dump()});
  }
  ex.messages.push_back({"user", request_input(t, r).dump()});
  return ex;
}

Json request_body(const ChatExchange& exchange) {
  Json messages = Json::array();
  for (const auto& m : exchange.messages) {
    messages.push_back(Json{{"role", m.role}, {"content", m.content}});
  }
  return Json{{"model", exchange.model},
              {"messages", std::move(messages)},
              {"temperature", exchange.temperature}};
}

std::string Endpoint::api_key_from_env() {
  const char* key = std::getenv("ANNOBRIDGE_API_KEY");
  return key ? key : "";
}

ChatReply HttpChatTransport::send(const Json& body) {
  const Json reply = post_json(endpoint_, "/chat/completions", body);
  ChatReply out;
  try {
    out.content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception& e) {
    throw TransportError(200, std::string("unexpected chat completion payload: ") + e.what());
  }
  if (auto it = reply.find("usage"); it != reply.end() && it->is_object()) {
    out.usage.prompt_tokens = it->value("prompt_tokens", 0L);
    out.usage.completion_tokens = it->value("completion_tokens", 0L);
    out.usage.total_tokens = it->value("total_tokens", 0L);
  }
  return out;
}

ChatReply TranscriptTransport::send(const Json& body) {
  Json entry{{"request", body}};
  try {
    ChatReply reply = inner_.send(body);
    entry["response"] = reply.content;
    std::lock_guard lock(mu_);
    append_line(path_, entry.dump());
    return reply;
  } catch (const Error& e) {
    entry["error"] = e.what();
    std::lock_guard lock(mu_);
    append_line(path_, entry.dump());
    throw;
  }
}

std::chrono::milliseconds RetryPolicy::delay_before(int attempt) const {
  if (attempt <= 1) return std::chrono::milliseconds(0);
  auto delay = backoff_base;
  for (int i = 2; i < attempt && delay < backoff_max; ++i) delay *= 2;
  return std::min(delay, backoff_max);
}

ChatExchange chat(ChatTransport& transport, ChatExchange exchange,
                  const RetryPolicy& policy) {
  if (policy.max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  if (exchange.model.empty()) exchange.model = transport.model();
  const Json body = request_body(exchange);
  std::string last_error;
  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    if (attempt > 1) {
      const auto delay = policy.delay_before(attempt);
      if (policy.sleep) {
        policy.sleep(delay);
      } else if (delay.count() > 0) {
        std::this_thread::sleep_for(delay);
      }
    }
    exchange.attempts = attempt;
    ChatReply reply;
    try {
      reply = transport.send(body);
    } catch (const AuthError&) {
      throw;
    } catch (const RateLimited& e) {
      last_error = std::string("rate limited: ") + e.what();
      continue;
    } catch (const TransportError& e) {
      last_error = e.what();
      continue;
    }
    exchange.raw_response = reply.content;
    exchange.usage = reply.usage;
    if (policy.validator) {
      try {
        policy.validator(reply.content);
      } catch (const std::exception& e) {
        last_error = e.what();
        continue;
      }
    }
    return exchange;
  }
  throw Exhausted(policy.max_attempts, last_error);
}

Json extract_json(std::string_view response_text, ExtractOptions options) {
  const std::string cleaned = strip_fences(response_text);
  auto found = first_object(cleaned);
  if (!found) throw NoJsonFound("no JSON object in response");
  const std::string_view rest = std::string_view(cleaned).substr(found->end);
  if (first_object(rest)) throw TrailingGarbage("more than one JSON object in response");
  if (!options.allow_trailing_prose && !trim(rest).empty()) {
    throw TrailingGarbage("text after the JSON object");
  }
  return std::move(found->value);
}

std::vector<RawRusSpan> validate_transfer_response(const SentenceRecord& request,
                                                   const Json& parsed) {
  if (!parsed.is_object()) throw MalformedResponse("response is not a JSON object");
  const auto it = parsed.find("spans_rus");
  if (it == parsed.end()) throw MalformedResponse("response lacks spans_rus");
  if (!it->is_array()) throw MalformedResponse("spans_rus is not a list");
  if (it->size() != request.spans.size()) {
    throw CountMismatch("expected " + std::to_string(request.spans.size()) +
                        " spans_rus entries, got " + std::to_string(it->size()));
  }
  std::vector<RawRusSpan> out;
  out.reserve(it->size());
  for (std::size_t i = 0; i < it->size(); ++i) {
    const Json& e = (*it)[i];
    if (!e.is_array() || e.size() != 3 || !e[0].is_string() || !e[2].is_string()) {
      throw MalformedResponse("spans_rus[" + std::to_string(i) +
                              "] is not [label, id, surface]");
    }
    const CharSpan& want = request.spans[i];
    RawRusSpan raw{e[0].get<std::string>(), id_of(e[1]),
                   std::string(trim(e[2].get<std::string>()))};
    if (raw.span_id != want.span_id) {
      throw IdMismatch("spans_rus[" + std::to_string(i) + "] has id " + raw.span_id +
                       ", expected " + want.span_id);
    }
    if (raw.label != want.label) {
      throw LabelMismatch("spans_rus[" + std::to_string(i) + "] has label " + raw.label +
                          ", expected " + want.label);
    }
    if (raw.surface.empty()) {
      throw MalformedResponse("spans_rus[" + std::to_string(i) + "] has an empty surface");
    }
    out.push_back(std::move(raw));
  }
  return out;
}

std::string validate_translate_response(const SentenceRecord& request,
                                        const Json& parsed) {
  if (!parsed.is_object()) throw MalformedResponse("response is not a JSON object");
  if (auto id = parsed.find("id"); id != parsed.end() && id_of(*id) != request.id) {
    throw IdMismatch("response id " + id_of(*id) + " does not match " + request.id);
  }
  const auto it = parsed.find("text_rus");
  if (it == parsed.end() || !it->is_string()) throw MalformedResponse("response lacks text_rus");
  std::string text(trim(it->get<std::string>()));
  if (text.empty()) throw MalformedResponse("text_rus is empty");
  return text;
}

}  // namespace annobridge
