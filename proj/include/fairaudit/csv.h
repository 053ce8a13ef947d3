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

// Minimal RFC 4180 reader/writer: quoted fields, doubled quotes, embedded
// separators and newlines, CRLF or LF line endings, optional UTF-8 BOM.

#ifndef FAIRAUDIT_CSV_H_
#define FAIRAUDIT_CSV_H_

#include <string>
#include <string_view>
#include <vector>

namespace fairaudit::csv {

struct Row {
  std::vector<std::string> fields;
  int line = 0;  // 1-based physical line where the record starts
};

// Parses the whole document. Blank lines are skipped. Throws
// Error(kMalformedRow) on an unterminated quoted field.
std::vector<Row> Parse(std::string_view text);

std::string ReadFile(const std::string& path);

// Quotes a field only when it contains a separator, quote, or newline.
std::string EscapeField(std::string_view field);
std::string FormatRow(const std::vector<std::string>& fields);

}  // namespace fairaudit::csv

#endif  // FAIRAUDIT_CSV_H_
