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

#include "fairaudit/text.h"

#include <algorithm>
#include <array>
#include <utility>

namespace fairaudit {
namespace {

using Range = std::pair<char32_t, char32_t>;

// Code point ranges of general category P* (inclusive), sorted. Covers the
// scripts that occur in English-language ASR transcripts plus the common
// CJK and fullwidth forms.
constexpr std::array kPunctuation = {
    Range{0x21, 0x23},     Range{0x25, 0x2A},     Range{0x2C, 0x2F},
    Range{0x3A, 0x3B},     Range{0x3F, 0x40},     Range{0x5B, 0x5D},
    Range{0x5F, 0x5F},     Range{0x7B, 0x7B},     Range{0x7D, 0x7D},
    Range{0xA1, 0xA1},     Range{0xA7, 0xA7},     Range{0xAB, 0xAB},
    Range{0xB6, 0xB7},     Range{0xBB, 0xBB},     Range{0xBF, 0xBF},
    Range{0x37E, 0x37E},   Range{0x387, 0x387},   Range{0x55A, 0x55F},
    Range{0x589, 0x58A},   Range{0x5BE, 0x5BE},   Range{0x5C0, 0x5C0},
    Range{0x5C3, 0x5C3},   Range{0x5C6, 0x5C6},   Range{0x5F3, 0x5F4},
    Range{0x609, 0x60A},   Range{0x60C, 0x60D},   Range{0x61B, 0x61B},
    Range{0x61D, 0x61F},   Range{0x66A, 0x66D},   Range{0x6D4, 0x6D4},
    Range{0x964, 0x965},   Range{0x970, 0x970},   Range{0x2010, 0x2027},
    Range{0x2030, 0x2043}, Range{0x2045, 0x2051}, Range{0x2053, 0x205E},
    Range{0x207D, 0x207E}, Range{0x208D, 0x208E}, Range{0x2308, 0x230B},
    Range{0x2329, 0x232A}, Range{0x2768, 0x2775}, Range{0x27C5, 0x27C6},
    Range{0x27E6, 0x27EF}, Range{0x2983, 0x2998}, Range{0x29D8, 0x29DB},
    Range{0x29FC, 0x29FD}, Range{0x2CF9, 0x2CFC}, Range{0x2CFE, 0x2CFF},
    Range{0x2E00, 0x2E2E}, Range{0x2E30, 0x2E4F}, Range{0x2E52, 0x2E5D},
    Range{0x3001, 0x3003}, Range{0x3008, 0x3011}, Range{0x3014, 0x301F},
    Range{0x3030, 0x3030}, Range{0x303D, 0x303D}, Range{0x30A0, 0x30A0},
    Range{0x30FB, 0x30FB}, Range{0xFE10, 0xFE19}, Range{0xFE30, 0xFE52},
    Range{0xFE54, 0xFE61}, Range{0xFE63, 0xFE63}, Range{0xFE68, 0xFE68},
    Range{0xFE6A, 0xFE6B}, Range{0xFF01, 0xFF03}, Range{0xFF05, 0xFF0A},
    Range{0xFF0C, 0xFF0F}, Range{0xFF1A, 0xFF1B}, Range{0xFF1F, 0xFF20},
    Range{0xFF3B, 0xFF3D}, Range{0xFF3F, 0xFF3F}, Range{0xFF5B, 0xFF5B},
    Range{0xFF5D, 0xFF5D}, Range{0xFF5F, 0xFF65},
};

constexpr char32_t kInvalid = 0xFFFFFFFF;

// Decodes one code point starting at `pos`, advancing it. Returns kInvalid
// (and advances by one byte) on malformed input.
char32_t DecodeUtf8(std::string_view s, size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  int extra = 0;
  char32_t cp = 0;
  if (b0 < 0x80) {
    ++pos;
    return b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    extra = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    extra = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    extra = 3;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return kInvalid;
  }
  if (pos + extra >= s.size()) {
    ++pos;
    return kInvalid;
  }
  for (int k = 1; k <= extra; ++k) {
    const auto b = static_cast<unsigned char>(s[pos + k]);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return kInvalid;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  pos += extra + 1;
  return cp;
}

void AppendUtf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

template <typename Keep>
TokenSequence Split(std::string_view raw, Keep transform) {
  TokenSequence tokens;
  std::string current;
  size_t pos = 0;
  while (pos < raw.size()) {
    const size_t start = pos;
    const char32_t cp = DecodeUtf8(raw, pos);
    if (cp == kInvalid) {
      current.push_back(raw[start]);
      continue;
    }
    if (unicode::IsWhitespace(cp)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
      continue;
    }
    const char32_t mapped = transform(cp);
    if (mapped != kInvalid) AppendUtf8(mapped, current);
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

}  // namespace

namespace unicode {

bool IsPunctuation(char32_t cp) {
  auto it = std::upper_bound(
      kPunctuation.begin(), kPunctuation.end(), cp,
      [](char32_t value, const Range& r) { return value < r.first; });
  if (it == kPunctuation.begin()) return false;
  --it;
  return cp <= it->second;
}

bool IsWhitespace(char32_t cp) {
  return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 ||
         cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) ||
         cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F ||
         cp == 0x3000;
}

char32_t ToLower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE) return cp == 0xD7 ? cp : cp + 0x20;
  if (cp == 0x130) return 'i';
  // Latin Extended-A pairs.
  if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177)) {
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) {
    return (cp % 2 == 1) ? cp + 1 : cp;
  }
  if (cp == 0x178) return 0xFF;
  // Greek.
  if (cp == 0x386) return 0x3AC;
  if (cp >= 0x388 && cp <= 0x38A) return cp + 37;
  if (cp == 0x38C) return 0x3CC;
  if (cp == 0x38E || cp == 0x38F) return cp + 63;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  // Cyrillic.
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if ((cp >= 0x460 && cp <= 0x481) || (cp >= 0x48A && cp <= 0x4BF)) {
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  // Fullwidth Latin.
  if (cp >= 0xFF21 && cp <= 0xFF3A) return cp + 0x20;
  return cp;
}

}  // namespace unicode

TokenSequence NormalizeText(std::string_view raw) {
  return Split(raw, [](char32_t cp) {
    return unicode::IsPunctuation(cp) ? kInvalid : unicode::ToLower(cp);
  });
}

TokenSequence SplitWhitespace(std::string_view raw) {
  return Split(raw, [](char32_t cp) { return cp; });
}

std::string NormalizeLabel(std::string_view raw) {
  std::string out;
  size_t pos = 0;
  while (pos < raw.size()) {
    const size_t start = pos;
    const char32_t cp = DecodeUtf8(raw, pos);
    if (cp == kInvalid) {
      out.push_back(raw[start]);
    } else {
      AppendUtf8(unicode::ToLower(cp), out);
    }
  }
  const auto first = out.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = out.find_last_not_of(" \t\r\n");
  return out.substr(first, last - first + 1);
}

}  // namespace fairaudit
