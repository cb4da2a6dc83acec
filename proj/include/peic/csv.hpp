#pragma once

#include <charconv>
#include <concepts>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace peic {

/// A type that knows its CSV header and how to render itself as fields.
template <typename Row>
concept CsvRow = requires(const Row& r) {
  { Row::csv_header() } -> std::convertible_to<std::vector<std::string>>;
  { r.csv_fields() } -> std::convertible_to<std::vector<std::string>>;
};

namespace csv {

template <std::integral T>
std::string num(T value) {
  return std::to_string(value);
}

/// Shortest of %g-style with 10 significant digits.
inline std::string num(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 10);
  return std::string(buf, res.ptr);
}

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void append_line(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += quote(fields[i]);
  }
  out += '\n';
}

/// Splits one line on commas, honoring double-quoted fields.
inline std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

/// Non-empty lines, CR stripped.
inline std::vector<std::vector<std::string>> parse(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    auto line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) rows.push_back(split_line(line));
  }
  return rows;
}

}  // namespace csv

/// Header line then one line per row, LF endings.
template <CsvRow Row>
std::string emit_csv(const std::vector<Row>& rows) {
  std::string out;
  csv::append_line(out, Row::csv_header());
  for (const auto& r : rows) csv::append_line(out, r.csv_fields());
  return out;
}

}  // namespace peic
