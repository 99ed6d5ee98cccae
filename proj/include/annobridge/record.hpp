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

#ifndef ANNOBRIDGE_RECORD_HPP_
#define ANNOBRIDGE_RECORD_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace annobridge {

using Json = nlohmann::ordered_json;

// Labeled half-open interval of code points over some owning text.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;
  std::string span_id;
  std::string surface;

  std::size_t length() const { return end - start; }
  bool operator==(const CharSpan&) const = default;
};

enum class Side { Source, Target };

// Unit of work passed between pipeline stages. `extra` holds fields this
// library does not interpret; they survive read/write cycles untouched.
struct SentenceRecord {
  std::string id;
  std::string text;
  std::vector<CharSpan> spans;
  std::optional<std::string> text_rus;
  std::optional<std::vector<CharSpan>> spans_rus;
  Json extra = Json::object();

  bool has_definition() const {
    for (const auto& s : spans) {
      if (s.label == "Definition") return true;
    }
    return false;
  }

  bool operator==(const SentenceRecord&) const = default;
};

}  // namespace annobridge

#endif  // ANNOBRIDGE_RECORD_HPP_
