// include/cepstra/text.h

// Copyright 2026  The Cepstra Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Small string helpers for config files and tables.

#ifndef CEPSTRA_TEXT_H_
#define CEPSTRA_TEXT_H_

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cepstra/common.h"

namespace cepstra {

inline std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

/// Splits on `sep`, trims every field and drops empty ones.
inline std::vector<std::string> SplitList(std::string_view s, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(sep, start);
    if (end == std::string_view::npos) end = s.size();
    std::string field = Trim(s.substr(start, end - start));
    if (!field.empty()) out.push_back(std::move(field));
    start = end + 1;
  }
  return out;
}

/// Splits on `sep` keeping empty fields (CSV rows).
inline std::vector<std::string> SplitFields(std::string_view s, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto end = s.find(sep, start);
    if (end == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, end - start));
    start = end + 1;
  }
}

inline std::string JoinList(const std::vector<std::string> &items,
                            std::string_view sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

template <typename T>
T ParseNumber(std::string_view s, std::string_view what) {
  const std::string t = Trim(s);
  T value{};
  const auto *first = t.data();
  const auto *last = t.data() + t.size();
  if (!t.empty() && t[0] == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  Require(ec == std::errc() && ptr == last && first != last, ErrorCode::kFormat,
          std::string(what) + ": cannot parse '" + t + "' as a number");
  return value;
}

inline int ParseInt(std::string_view s, std::string_view what) {
  return ParseNumber<int>(s, what);
}
inline std::uint64_t ParseUint64(std::string_view s, std::string_view what) {
  return ParseNumber<std::uint64_t>(s, what);
}
inline double ParseDouble(std::string_view s, std::string_view what) {
  return ParseNumber<double>(s, what);
}

/// Shortest representation that round-trips.
inline std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

/// Fixed notation with `digits` decimals.
inline std::string FormatFixed(double v, int digits) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, digits);
  return std::string(buf, ptr);
}

}  // namespace cepstra

#endif  // CEPSTRA_TEXT_H_
