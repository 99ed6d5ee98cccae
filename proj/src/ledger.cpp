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

#include "annobridge/ledger.hpp"

#include <fstream>
#include <stdexcept>

#include "annobridge/error.hpp"
#include "annobridge/jsonl.hpp"

namespace annobridge {

Ledger::Ledger(int max_attempts) : max_attempts_(max_attempts) {
  if (max_attempts_ < 1) throw std::invalid_argument("max_attempts must be >= 1");
}

Ledger::Ledger(std::filesystem::path path, int max_attempts) : Ledger(max_attempts) {
  path_ = std::move(path);
}

Ledger Ledger::load(const std::filesystem::path& path, int max_attempts) {
  Ledger ledger(path, max_attempts);
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (std::filesystem::exists(path)) throw IoError("cannot open " + path.string());
    return ledger;
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() ||
        !j.contains("status") || !j["status"].is_string()) {
      throw ParseError(path.string(), line_no, "ledger entry needs string id and status");
    }
    const auto id = j["id"].get<std::string>();
    const auto status = j["status"].get<std::string>();
    const int attempts = j.value("attempts", 0);
    if (status == "done") {
      ledger.failures_.erase(id);
      ledger.done_.insert(id);
    } else if (status == "failed" || status == "exhausted") {
      ledger.done_.erase(id);
      ledger.failures_[id] = {std::min(attempts, max_attempts), j.value("error", "")};
    } else {
      throw ParseError(path.string(), line_no, "unknown ledger status '" + status + "'");
    }
  }
  return ledger;
}

void Ledger::mark_done(const std::string& id) {
  if (done_.contains(id)) return;
  failures_.erase(id);
  done_.insert(id);
  persist();
}

void Ledger::mark_failed(const std::string& id, const std::string& error) {
  if (done_.contains(id) || is_exhausted(id)) return;
  auto& f = failures_[id];
  ++f.attempts;
  f.last_error = error;
  persist();
}

bool Ledger::is_exhausted(const std::string& id) const {
  auto it = failures_.find(id);
  return it != failures_.end() && it->second.attempts >= max_attempts_;
}

std::string Ledger::serialize() const {
  std::string out;
  for (const auto& id : done_) {
    out += Json{{"id", id}, {"status", "done"}, {"attempts", 0}}.dump() + "\n";
  }
  for (const auto& [id, f] : failures_) {
    Json j{{"id", id},
           {"status", f.attempts >= max_attempts_ ? "exhausted" : "failed"},
           {"attempts", f.attempts}};
    if (!f.last_error.empty()) j["error"] = f.last_error;
    out += j.dump() + "\n";
  }
  return out;
}

void Ledger::persist() const {
  if (path_) write_file_atomic(*path_, serialize());
}

std::vector<SentenceRecord> pending(const std::vector<SentenceRecord>& records,
                                    const Ledger& ledger) {
  std::vector<SentenceRecord> out;
  for (const auto& r : records) {
    if (!ledger.is_done(r.id) && !ledger.is_exhausted(r.id)) out.push_back(r);
  }
  return out;
}

}  // namespace annobridge
