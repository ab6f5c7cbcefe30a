// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef THZRIS_IO_HPP
#define THZRIS_IO_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "errors.hpp"

namespace thzris {

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view text, std::string_view what) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("invalid number for " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

/// Parses "start:step:end" (inclusive) or a single value. Values are rounded
/// to 12 decimals so that 0:0.05:1 yields 0.15 rather than 0.15000000000000002.
inline std::vector<double> parse_grid(std::string_view spec) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    auto next = spec.find(':', pos);
    parts.push_back(spec.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  if (parts.size() == 1) return {parse_double(parts[0], "grid")};
  if (parts.size() != 3) throw ConfigError("grid must be start:step:end, got '" + std::string(spec) + "'");
  const double start = parse_double(parts[0], "grid start");
  const double step = parse_double(parts[1], "grid step");
  const double end = parse_double(parts[2], "grid end");
  if (!(step > 0.0) || end < start) {
    throw ConfigError("grid needs step > 0 and end >= start: '" + std::string(spec) + "'");
  }
  const auto count = static_cast<std::int64_t>(std::floor((end - start) / step + 1e-9)) + 1;
  if (count > 1000000) throw ConfigError("grid too large: '" + std::string(spec) + "'");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    double v = start + static_cast<double>(i) * step;
    v = std::round(v * 1e12) / 1e12;
    grid.push_back(v);
  }
  return grid;
}

inline std::string grid_to_string(const std::vector<double>& grid) {
  std::string out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i) out += ',';
    out += format_double(grid[i]);
  }
  return out;
}

class CsvRow;

/// Minimal RFC-4180 writer: CRLF line endings are not used (LF only), fields
/// containing separators, quotes or newlines are quoted and quotes doubled.
class CsvWriter {
public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(const std::vector<std::string>& names) { row(names); }

  void row(const CsvRow& r);

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      write_field(fields[i]);
    }
    out_ << '\n';
  }

  static std::string quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string q = "\"";
    for (char c : field) {
      if (c == '"') q += '"';
      q += c;
    }
    q += '"';
    return q;
  }

private:
  void write_field(const std::string& f) { out_ << quote(f); }
  std::ostream& out_;
};

/// Row builder so drivers can mix numbers and text without manual formatting.
class CsvRow {
public:
  CsvRow& operator<<(double v) {
    fields_.push_back(format_double(v));
    return *this;
  }
  CsvRow& operator<<(int v) {
    fields_.push_back(std::to_string(v));
    return *this;
  }
  CsvRow& operator<<(long v) {
    fields_.push_back(std::to_string(v));
    return *this;
  }
  CsvRow& operator<<(std::size_t v) {
    fields_.push_back(std::to_string(v));
    return *this;
  }
  CsvRow& operator<<(const std::string& s) {
    fields_.push_back(s);
    return *this;
  }
  CsvRow& operator<<(const char* s) {
    fields_.emplace_back(s);
    return *this;
  }
  const std::vector<std::string>& fields() const { return fields_; }

private:
  std::vector<std::string> fields_;
};

inline void CsvWriter::row(const CsvRow& r) { row(r.fields()); }

}  // namespace thzris

#endif
