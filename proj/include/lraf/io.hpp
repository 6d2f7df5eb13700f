// Copyright 2026 The lraf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Text I/O shared by the CSV writers and file-format parsers. Numbers are
// written in shortest round-trip form so reruns produce identical bytes and
// reloads reproduce the exact doubles.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "lraf/core.hpp"
#include "lraf/error.hpp"

namespace lraf {

inline std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& where) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last || text.empty()) {
    throw ConfigError(where + ": expected a decimal number, got '" +
                      std::string(text) + "'");
  }
  return value;
}

inline std::int64_t parse_int(std::string_view text, const std::string& where) {
  std::int64_t value = 0;
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(text.data(), last, value);
  if (res.ec != std::errc() || res.ptr != last || text.empty()) {
    throw ConfigError(where + ": expected an integer, got '" +
                      std::string(text) + "'");
  }
  return value;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw ConfigError("CSV has no column '" + std::string(name) + "'");
  }
};

// Plain comma-separated values, no quoting, LF line ends.
inline CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split(line, ',');
    std::vector<std::string> row(fields.begin(), fields.end());
    if (line_no == 1) {
      table.header = std::move(row);
    } else {
      if (row.size() != table.header.size()) {
        throw ConfigError("CSV line " + std::to_string(line_no) + " has " +
                          std::to_string(row.size()) + " fields, expected " +
                          std::to_string(table.header.size()));
      }
      table.rows.push_back(std::move(row));
    }
  }
  if (table.header.empty()) throw ConfigError("CSV input is empty");
  return table;
}

inline void write_trace_csv(std::ostream& out, const StateTrace& trace) {
  out << "t,u,v,z\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto& s = trace.samples[k];
    out << format_number(trace.time(k)) << ',' << format_number(s.u) << ','
        << format_number(s.v) << ',' << (s.z ? 1 : 0) << '\n';
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

}  // namespace lraf
