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

#ifndef ANNOBRIDGE_ERROR_HPP_
#define ANNOBRIDGE_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace annobridge {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed corpus or JSONL input. `line` is 1-based, 0 when unknown.
class FormatError : public Error {
 public:
  FormatError(std::string path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what),
        path_(std::move(path)),
        line_(line),
        detail_(what) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }
  // Message without the location prefix.
  const std::string& detail() const { return detail_; }

 private:
  std::string path_;
  std::size_t line_;
  std::string detail_;
};

class ParseError : public FormatError {
 public:
  using FormatError::FormatError;
};

class MissingField : public Error {
 public:
  MissingField(std::string field, std::size_t line = 0)
      : Error("missing field '" + field + "'" +
              (line ? " at line " + std::to_string(line) : std::string())),
        field_(std::move(field)),
        line_(line) {}

  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

class InvalidBio : public Error {
 public:
  using Error::Error;
};

class OverlappingSpans : public Error {
 public:
  explicit OverlappingSpans(std::vector<std::string> ids)
      : Error(message(ids)), span_ids_(std::move(ids)) {}

  const std::vector<std::string>& span_ids() const { return span_ids_; }

 private:
  static std::string message(const std::vector<std::string>& ids) {
    std::string m = "overlapping spans:";
    for (const auto& id : ids) m += " " + id;
    return m;
  }
  std::vector<std::string> span_ids_;
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(const std::string& id)
      : Error("duplicate record id '" + id + "'") {}
};

class IdCollision : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace annobridge

#endif  // ANNOBRIDGE_ERROR_HPP_
