#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "radpair/error.hpp"

namespace radpair::pipeline {

/// Comma-separated table with `# key: value` metadata lines ahead of the
/// header row.
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of each row (filled by the reader).
  std::vector<std::size_t> lines;

  std::optional<std::string> meta_value(std::string_view key) const {
    for (const auto &[k, v] : meta)
      if (k == key)
        return v;
    return std::nullopt;
  }

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name)
        return i;
    return std::nullopt;
  }
};

/// Shortest representation that round-trips exactly.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_number(std::uint64_t v) { return std::to_string(v); }

inline std::string format_optional(const std::optional<double> &v) {
  return v ? format_number(*v) : std::string();
}

inline double parse_double(std::string_view text, std::size_t line,
                           std::string_view what) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ValidationError("line " + std::to_string(line) + ": " +
                          std::string(what) + " '" + std::string(text) +
                          "' is not a number");
  return v;
}

inline std::optional<double> parse_optional(std::string_view text,
                                            std::size_t line,
                                            std::string_view what) {
  if (text.empty())
    return std::nullopt;
  return parse_double(text, line, what);
}

/// Non-negative integer; rejects signs, fractions and exponents.
inline std::uint64_t parse_count(std::string_view text, std::size_t line,
                                 std::string_view what) {
  if (!text.empty() && text.front() == '-')
    throw ValidationError("line " + std::to_string(line) + ": negative " +
                          std::string(what) + " '" + std::string(text) + "'");
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() ||
      res.ptr != text.data() + text.size())
    throw ValidationError("line " + std::to_string(line) + ": " +
                          std::string(what) + " '" + std::string(text) +
                          "' is not a non-negative integer");
  return v;
}

inline std::vector<std::string> split_row(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos)
      break;
    start = comma + 1;
  }
  return out;
}

inline void write_csv(const std::filesystem::path &path, const CsvTable &table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open " + path.string() + " for writing");
  for (const auto &[k, v] : table.meta)
    out << "# " << k << ": " << v << '\n';
  for (std::size_t i = 0; i < table.header.size(); ++i)
    out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto &row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << '\n';
  }
  if (!out)
    throw IoError("write to " + path.string() + " failed");
}

inline CsvTable read_csv(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    if (line.front() == '#') {
      std::string_view body(line);
      body.remove_prefix(1);
      while (!body.empty() && body.front() == ' ')
        body.remove_prefix(1);
      const std::size_t colon = body.find(':');
      if (colon != std::string_view::npos) {
        std::string_view value = body.substr(colon + 1);
        while (!value.empty() && value.front() == ' ')
          value.remove_prefix(1);
        table.meta.emplace_back(std::string(body.substr(0, colon)),
                                std::string(value));
      }
      continue;
    }
    auto fields = split_row(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size())
      throw ValidationError(path.string() + " line " + std::to_string(number) +
                            ": expected " + std::to_string(table.header.size()) +
                            " fields, found " + std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
    table.lines.push_back(number);
  }
  if (!have_header)
    throw ValidationError(path.string() + ": missing header row");
  return table;
}

} // namespace radpair::pipeline
