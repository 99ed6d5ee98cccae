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

#ifndef ANNOBRIDGE_UTF8_HPP_
#define ANNOBRIDGE_UTF8_HPP_

#include <cstddef>
#include <string>
#include <string_view>

// All offsets exposed by the library count Unicode code points, end-exclusive.
namespace annobridge::utf8 {

// Decodes UTF-8. Invalid bytes decode to U+FFFD, one per byte.
std::u32string decode(std::string_view s);
std::string encode(std::u32string_view s);

std::size_t length(std::string_view s);

// Code-point slice [start, end) of a UTF-8 string. Out-of-range bounds are
// clamped.
std::string slice(std::string_view s, std::size_t start, std::size_t end);

bool is_space(char32_t c);
bool is_punct(char32_t c);
inline bool is_word(char32_t c) { return !is_space(c) && !is_punct(c); }

// Lowercases ASCII, Latin-1 and basic Cyrillic letters; others pass through.
char32_t to_lower(char32_t c);
std::u32string to_lower(std::u32string_view s);

}  // namespace annobridge::utf8

#endif  // ANNOBRIDGE_UTF8_HPP_
