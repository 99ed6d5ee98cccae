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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "annobridge/gateway.hpp"

namespace annobridge {

Json post_json(const Endpoint& endpoint, std::string_view route, const Json& body) {
  const std::string& url = endpoint.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw TransportError(0, "endpoint URL lacks a scheme: " + url);
  }
  const auto path_begin = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_begin);
  std::string path = path_begin == std::string::npos ? "" : url.substr(path_begin);
  while (!path.empty() && path.back() == '/') path.pop_back();
  path += route;

  httplib::Client client(origin);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(endpoint.timeout);
  client.set_write_timeout(endpoint.timeout);
  httplib::Headers headers;
  if (!endpoint.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint.api_key);
  }

  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) {
    throw TransportError(0, "request to " + origin + path +
                                " failed: " + httplib::to_string(res.error()));
  }
  const int status = res->status;
  const std::string summary = "HTTP " + std::to_string(status) + " from " + origin + path;
  if (status == 401 || status == 403) throw AuthError(status, summary);
  if (status == 429) throw RateLimited(summary);
  if (status < 200 || status >= 300) throw TransportError(status, summary + ": " + res->body);
  Json reply = Json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) throw TransportError(status, summary + ": body is not JSON");
  return reply;
}

}  // namespace annobridge
