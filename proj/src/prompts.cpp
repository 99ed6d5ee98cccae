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

#include <stdexcept>

#include "annobridge/gateway.hpp"
#include "annobridge/utf8.hpp"

namespace annobridge {
namespace {

constexpr std::string_view kTransferSpans =
    R"PROMPT(Given a JSON object, find the exact corresponding text in the Russian translation for each English span and store the results in a new field called spans_rus. The input JSON object contains the following fields:
- text: English source text.
- text_rus: Russian translated text.
- spans: A list of spans, each containing: 1. The start index in the English text; 2. The end index in the English text; 3. The label; 4. The ID; 5. The portion of the English text that was extracted using the start and end indices.
- and other fields.

Your task is to: For each span, locate the exact corresponding Russian text in text_rus that matches the exact wording of the English span (the 5th element in each span) in meaning.

Important:
- Do not modify or correct the form, word order, or any grammatical aspects of the Russian text — it must be extracted exactly as it appears in text_rus, including word endings, grammatical cases, punctuation, punctuation marks and spacing.
- Record the matched Russian text as a new list in a new field spans_rus, where each item is also a list containing the same label and ID as in the English span, and the matched Russian text.
- For each span in spans you must get a span in spans_rus
No explanation, just output the updated JSON.)PROMPT";

constexpr std::string_view kTranslate1 =
    R"PROMPT(Given a JSON object, write an accurate translation into Russian for the original English sentence and save the results in a new field named text_rus. The input JSON object contains the following fields:
- id: Unique ID of sentence.
- text: English source text.

Your task is to: For each text in English (text) write its exact translation into Russian in a scientific lexical style and save the results in a new field named text_rus.

Important:
- Write down the corresponding translated Russian text in the form of a new text_rus field.
- For English text in text, you should definitely get the Russian text in text_rus.
No explanation, just output the updated JSON.)PROMPT";

constexpr std::string_view kTranslate2 =
    R"PROMPT(Given a JSON object, write an accurate translation into Russian for the original English sentence and save the results in a new field named text_rus. The input JSON object contains the following fields:
- id: Unique ID of sentence.
- text: English source text.

Your task is to: For each text in English write its exact translation into Russian taking into account the style of the sentence and its scientific significance (for example, medical, historical, etc.) and save the results in a new field named text_rus.

Important:
- Write down the corresponding translated Russian text in the form of a new text_rus field.
- For English text in text, you should definitely get the Russian text in text_rus.
No explanation, just output the updated JSON.)PROMPT";

struct Phrase {
  const char* label;
  const char* en;
  const char* ru;
};

CharSpan span_of(const std::string& text, const std::string& surface,
                 const std::string& label, std::size_t ordinal) {
  const auto byte_pos = text.find(surface);
  if (byte_pos == std::string::npos) throw std::logic_error("example phrase not in text");
  const std::size_t start = utf8::length(text.substr(0, byte_pos));
  return {start, start + utf8::length(surface), label, "T" + std::to_string(ordinal), surface};
}

SentenceRecord example(const std::string& id, const std::string& en, const std::string& ru,
                       std::initializer_list<Phrase> phrases) {
  SentenceRecord r;
  r.id = id;
  r.text = en;
  r.text_rus = ru;
  r.spans_rus.emplace();
  std::size_t k = 1;
  for (const auto& p : phrases) {
    r.spans.push_back(span_of(en, p.en, p.label, k));
    r.spans_rus->push_back(span_of(ru, p.ru, p.label, k));
    ++k;
  }
  return r;
}

// Hand-written demonstrations; replace them with gold-set examples through
// configuration when available.
std::vector<SentenceRecord> builtin_examples() {
  return {
      example("example-1", "Mitosis is the division of the nucleus.",
              "Митоз — это деление ядра.",
              {{"Term", "Mitosis", "Митоз"},
               {"Definition", "the division of the nucleus", "деление ядра"}}),
      example("example-2",
              "An enzyme, also called a biological catalyst, speeds up chemical reactions.",
              "Фермент, также называемый биологическим катализатором, ускоряет химические "
              "реакции.",
              {{"Term", "enzyme", "Фермент"},
               {"Alias-Term", "biological catalyst", "биологическим катализатором"},
               {"Definition", "speeds up chemical reactions", "ускоряет химические реакции"}}),
  };
}

}  // namespace

std::string_view to_string(PromptKind kind) {
  switch (kind) {
    case PromptKind::TransferSpans:
      return "transfer";
    case PromptKind::Translate1:
      return "translate1";
    case PromptKind::Translate2:
      return "translate2";
  }
  return "?";
}

std::optional<PromptKind> prompt_kind_from_string(std::string_view name) {
  if (name == "transfer") return PromptKind::TransferSpans;
  if (name == "translate1") return PromptKind::Translate1;
  if (name == "translate2") return PromptKind::Translate2;
  return std::nullopt;
}

std::string_view prompt_text(PromptKind kind) {
  switch (kind) {
    case PromptKind::TransferSpans:
      return kTransferSpans;
    case PromptKind::Translate1:
      return kTranslate1;
    case PromptKind::Translate2:
      return kTranslate2;
  }
  return {};
}

PromptTemplate default_template(PromptKind kind) {
  PromptTemplate t;
  t.kind = kind;
  t.system_text = std::string(prompt_text(kind));
  for (const auto& ex : builtin_examples()) {
    FewShotExample shot;
    shot.input = request_input(t, ex);
    shot.output = shot.input;
    if (kind == PromptKind::TransferSpans) {
      Json rus = Json::array();
      for (const auto& s : *ex.spans_rus) rus.push_back(Json::array({s.label, s.span_id, s.surface}));
      shot.output["spans_rus"] = std::move(rus);
    } else {
      shot.output["text_rus"] = *ex.text_rus;
    }
    t.few_shot.push_back(std::move(shot));
  }
  return t;
}

}  // namespace annobridge
