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

#include "annobridge/jsonl.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <set>

#include "annobridge/error.hpp"
#include "annobridge/utf8.hpp"

namespace annobridge {
namespace {

const std::set<std::string> kKnownFields = {"id",       "text",      "spans",
                                            "text_rus", "spans_rus", "has_definition"};

std::string id_string(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return v.dump();
  throw Error("span id must be a string or integer");
}

std::vector<CharSpan> spans_from_json(const Json& arr, const std::string& text,
                                      const char* field, std::size_t line) {
  if (!arr.is_array()) throw ParseError("", line, std::string(field) + " is not a list");
  const std::u32string cps = utf8::decode(text);
  std::vector<CharSpan> out;
  std::set<std::string> ids;
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 5 || !e[0].is_number_unsigned() ||
        !e[1].is_number_unsigned() || !e[2].is_string() || !e[4].is_string()) {
      throw ParseError("", line,
                       std::string(field) + " element is not [start, end, label, id, surface]");
    }
    CharSpan s;
    s.start = e[0].get<std::size_t>();
    s.end = e[1].get<std::size_t>();
    s.label = e[2].get<std::string>();
    try {
      s.span_id = id_string(e[3]);
    } catch (const Error& err) {
      throw ParseError("", line, err.what());
    }
    s.surface = e[4].get<std::string>();
    if (s.start >= s.end || s.end > cps.size()) {
      throw ParseError("", line, "span " + s.span_id + " has invalid bounds");
    }
    if (utf8::encode(std::u32string_view(cps).substr(s.start, s.end - s.start)) !=
        s.surface) {
      throw ParseError("", line, "span " + s.span_id + " surface does not match its text slice");
    }
    if (!ids.insert(s.span_id).second) {
      throw ParseError("", line, "duplicate span id " + s.span_id + " in " + field);
    }
    out.push_back(std::move(s));
  }
  return out;
}

[[noreturn]] void throw_errno(const std::string& what, const std::filesystem::path& p) {
  throw IoError(what + " " + p.string() + ": " + std::strerror(errno));
}

void write_all(int fd, const std::string& content, const std::filesystem::path& p) {
  std::size_t off = 0;
  while (off < content.size()) {
    const auto n = ::write(fd, content.data() + off, content.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      throw_errno("write failed for", p);
    }
    off += static_cast<std::size_t>(n);
  }
}

}  // namespace

Json span_to_json(const CharSpan& s) {
  return Json::array({s.start, s.end, s.label, s.span_id, s.surface});
}

Json record_to_json(const SentenceRecord& r) {
  Json j = Json::object();
  j["id"] = r.id;
  j["text"] = r.text;
  Json spans = Json::array();
  for (const auto& s : r.spans) spans.push_back(span_to_json(s));
  j["spans"] = std::move(spans);
  if (r.text_rus) j["text_rus"] = *r.text_rus;
  if (r.spans_rus) {
    Json rus = Json::array();
    for (const auto& s : *r.spans_rus) rus.push_back(span_to_json(s));
    j["spans_rus"] = std::move(rus);
  }
  j["has_definition"] = r.has_definition();
  for (const auto& [k, v] : r.extra.items()) {
    if (!kKnownFields.contains(k)) j[k] = v;
  }
  return j;
}

SentenceRecord record_from_json(const Json& j, std::size_t line) {
  if (!j.is_object()) throw ParseError("", line, "line is not a JSON object");
  if (!j.contains("id")) throw MissingField("id", line);
  if (!j.contains("text")) throw MissingField("text", line);
  SentenceRecord r;
  try {
    r.id = id_string(j["id"]);
  } catch (const Error& e) {
    throw ParseError("", line, e.what());
  }
  if (!j["text"].is_string()) throw ParseError("", line, "text is not a string");
  r.text = j["text"].get<std::string>();
  if (j.contains("spans")) r.spans = spans_from_json(j["spans"], r.text, "spans", line);
  if (j.contains("text_rus") && !j["text_rus"].is_null()) {
    if (!j["text_rus"].is_string()) throw ParseError("", line, "text_rus is not a string");
    r.text_rus = j["text_rus"].get<std::string>();
  }
  if (j.contains("spans_rus") && !j["spans_rus"].is_null()) {
    if (!r.text_rus) throw ParseError("", line, "spans_rus present without text_rus");
    r.spans_rus = spans_from_json(j["spans_rus"], *r.text_rus, "spans_rus", line);
  }
  for (const auto& [k, v] : j.items()) {
    if (!kKnownFields.contains(k)) r.extra[k] = v;
  }
  return r;
}

std::size_t write_jsonl(const std::filesystem::path& path,
                        const std::vector<SentenceRecord>& records) {
  std::set<std::string_view> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.id).second) throw DuplicateId(r.id);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : records) {
    out << record_to_json(r).dump() << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
  return records.size();
}

std::vector<SentenceRecord> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<SentenceRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
    try {
      out.push_back(record_from_json(j, line_no));
    } catch (const ParseError& e) {
      throw ParseError(path.string(), line_no, e.detail());
    }
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw_errno("cannot create", tmp);
  write_all(fd, content, tmp);
  if (::fsync(fd) != 0) {
    ::close(fd);
    throw_errno("fsync failed for", tmp);
  }
  ::close(fd);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

void append_line(const std::filesystem::path& path, const std::string& line) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw_errno("cannot open", path);
  write_all(fd, line + "\n", path);
  if (::fsync(fd) != 0) {
    ::close(fd);
    throw_errno("fsync failed for", path);
  }
  ::close(fd);
}

}  // namespace annobridge
