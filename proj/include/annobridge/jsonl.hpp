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

#ifndef ANNOBRIDGE_JSONL_HPP_
#define ANNOBRIDGE_JSONL_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "annobridge/record.hpp"

namespace annobridge {

// Spans serialize as [start, end, label, id, surface].
Json span_to_json(const CharSpan& s);
Json record_to_json(const SentenceRecord& r);

// Throws MissingField for absent id/text and ParseError for shape or
// invariant violations. `line` is used only in error messages.
SentenceRecord record_from_json(const Json& j, std::size_t line = 0);

// One compact JSON object per line, LF-terminated. Throws DuplicateId before
// touching the file, IoError when the file cannot be written.
std::size_t write_jsonl(const std::filesystem::path& path,
                        const std::vector<SentenceRecord>& records);

std::vector<SentenceRecord> read_jsonl(const std::filesystem::path& path);

// Writes `content` to a sibling temp file, syncs it, then renames it over
// `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Appends one line and syncs.
void append_line(const std::filesystem::path& path, const std::string& line);

}  // namespace annobridge

#endif  // ANNOBRIDGE_JSONL_HPP_
