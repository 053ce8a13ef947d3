/*
 * Copyright 2026 The FairAudit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FAIRAUDIT_TEXT_H_
#define FAIRAUDIT_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace fairaudit {

using TokenSequence = std::vector<std::string>;

// Lowercases, deletes characters in the Unicode punctuation categories
// (Pc, Pd, Ps, Pe, Pi, Pf, Po), and splits on Unicode whitespace. Deleted
// punctuation does not split a token: "it's" becomes "its". Invalid UTF-8
// bytes are kept verbatim.
TokenSequence NormalizeText(std::string_view raw);

// Whitespace split only, no case folding or punctuation removal.
TokenSequence SplitWhitespace(std::string_view raw);

// Dispatches on `normalize`.
inline TokenSequence Tokenize(std::string_view raw, bool normalize) {
  return normalize ? NormalizeText(raw) : SplitWhitespace(raw);
}

// Lowercases a category label and trims surrounding whitespace. Used for
// demographic labels, which keep their punctuation.
std::string NormalizeLabel(std::string_view raw);

namespace unicode {
bool IsPunctuation(char32_t cp);
bool IsWhitespace(char32_t cp);
char32_t ToLower(char32_t cp);
}  // namespace unicode

}  // namespace fairaudit

#endif  // FAIRAUDIT_TEXT_H_
