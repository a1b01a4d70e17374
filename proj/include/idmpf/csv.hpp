// Copyright 2026 The idmpf Authors
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

#ifndef IDMPF__CSV_HPP_
#define IDMPF__CSV_HPP_

#include "idmpf/errors.hpp"

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace idmpf::csv
{

inline std::string_view trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

/// Splits on `delim`; no quoting (none of the supported formats quote fields).
inline std::vector<std::string_view> split(std::string_view line, char delim)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) {
      break;
    }
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string_view> split_whitespace(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) {
      ++i;
    }
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
      ++i;
    }
    if (i > start) {
      out.push_back(line.substr(start, i - start));
    }
  }
  return out;
}

/// Shortest representation that parses back to the same double.
inline std::string format_double(double value)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view field, std::size_t line, std::string_view column)
{
  double value = 0.0;
  const auto * begin = field.data();
  const auto * end = field.data() + field.size();
  if (!field.empty() && *begin == '+') {
    ++begin;
  }
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ParseError(line, "column '" + std::string(column) + "': not a number: '" + std::string(field) + "'");
  }
  return value;
}

inline std::int64_t parse_int(std::string_view field, std::size_t line, std::string_view column)
{
  std::int64_t value = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    // Exports sometimes write integral ids as "12.0".
    const double d = parse_double(field, line, column);
    if (d != static_cast<double>(static_cast<std::int64_t>(d))) {
      throw ParseError(line, "column '" + std::string(column) + "': not an integer: '" + std::string(field) + "'");
    }
    return static_cast<std::int64_t>(d);
  }
  return value;
}

}  // namespace idmpf::csv

#endif  // IDMPF__CSV_HPP_
