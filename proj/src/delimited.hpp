// Minimal delimiter-separated text helpers with double-quote escaping, used
// for corpus files and annotation sheets. One record per line; embedded
// newlines are not supported.

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace promptlog::detail {

/// Splits one line into fields. A field wrapped in double quotes may contain
/// the delimiter; doubled quotes unescape to one quote.
inline std::vector<std::string> split_delimited(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"' && current.empty()) {
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

/// Quotes a field when it contains the delimiter, a quote or a newline.
inline std::string quote_field(std::string_view field, char delimiter) {
  const bool needs_quotes = field.find(delimiter) != std::string_view::npos ||
                            field.find('"') != std::string_view::npos ||
                            field.find('\n') != std::string_view::npos ||
                            field.find('\r') != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string join_delimited(const std::vector<std::string>& fields, char delimiter) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += delimiter;
    out += quote_field(fields[i], delimiter);
  }
  return out;
}

}  // namespace promptlog::detail
