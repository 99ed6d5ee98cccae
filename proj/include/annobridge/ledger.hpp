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

#ifndef ANNOBRIDGE_LEDGER_HPP_
#define ANNOBRIDGE_LEDGER_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "annobridge/record.hpp"

namespace annobridge {

inline constexpr int kDefaultMaxAttempts = 5;

struct FailureState {
  int attempts = 0;
  std::string last_error;

  bool operator==(const FailureState&) const = default;
};

// Per-record completion state for resumable batch runs.
//
// Stored as JSONL, one {id, status, attempts, error?} object per record,
// status being "done", "failed" or "exhausted". Every mutation rewrites the
// file through a temp file and a rename, so a crash leaves either the old
// or the new state on disk. A ledger constructed without a path lives in
// memory only.
class Ledger {
 public:
  explicit Ledger(int max_attempts = kDefaultMaxAttempts);
  Ledger(std::filesystem::path path, int max_attempts = kDefaultMaxAttempts);

  // Loads `path` if it exists; a missing file yields an empty ledger bound
  // to that path. Throws ParseError on a corrupt file.
  static Ledger load(const std::filesystem::path& path,
                     int max_attempts = kDefaultMaxAttempts);

  // Idempotent. A done id leaves the failure map.
  void mark_done(const std::string& id);
  // Increments the attempt counter unless the id is already done or
  // exhausted.
  void mark_failed(const std::string& id, const std::string& error);

  bool is_done(const std::string& id) const { return done_.contains(id); }
  bool is_exhausted(const std::string& id) const;

  const std::set<std::string>& done_ids() const { return done_; }
  const std::map<std::string, FailureState>& failures() const { return failures_; }
  int max_attempts() const { return max_attempts_; }
  const std::optional<std::filesystem::path>& path() const { return path_; }

  std::string serialize() const;

  bool operator==(const Ledger& o) const {
    return done_ == o.done_ && failures_ == o.failures_;
  }

 private:
  void persist() const;

  std::optional<std::filesystem::path> path_;
  int max_attempts_;
  std::set<std::string> done_;
  std::map<std::string, FailureState> failures_;
};

// Records neither done nor exhausted, in input order.
std::vector<SentenceRecord> pending(const std::vector<SentenceRecord>& records,
                                    const Ledger& ledger);

}  // namespace annobridge

#endif  // ANNOBRIDGE_LEDGER_HPP_
