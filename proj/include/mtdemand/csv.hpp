#pragma once

// Minimal RFC 4180 reading/writing helpers shared by the panel, estimate,
// retail and report formats.

#include <charconv>
#include <cstdio>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mtdemand/error.hpp"

namespace mtdemand::csv {

/// Shortest text that reads back as the identical double (17 significant digits).
inline std::string format_double(double x) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(n));
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::optional<long long> parse_int(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

/// Splits one record. Quoted fields may contain commas and doubled quotes.
/// Returns nullopt when a quote is left open.
inline std::optional<std::vector<std::string>> split_record(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) return std::nullopt;
  fields.push_back(std::move(field));
  return fields;
}

inline std::string quote(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

/// Reads one logical record, joining physical lines while a quote is open.
inline bool read_record(std::istream& in, std::string& record) {
  record.clear();
  std::string line;
  if (!std::getline(in, line)) return false;
  record = std::move(line);
  auto open_quote = [](const std::string& s) {
    bool q = false;
    for (char c : s)
      if (c == '"') q = !q;
    return q;
  };
  while (open_quote(record) && std::getline(in, line)) {
    record.push_back('\n');
    record += line;
  }
  return true;
}

/// Header lookup: position of `name` or throws MissingColumn.
inline std::size_t column_index(const std::vector<std::string>& header, std::string_view name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string_view h = header[i];
    if (i == 0 && h.size() >= 3 && static_cast<unsigned char>(h[0]) == 0xEF) h.remove_prefix(3);
    if (h == name) return i;
  }
  throw Error(ErrorKind::MissingColumn, "column '" + std::string(name) + "' not found");
}

}  // namespace mtdemand::csv
