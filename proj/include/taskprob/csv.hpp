#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace taskprob::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

struct Table {
  std::filesystem::path path;
  std::vector<std::string> header;
  std::vector<Row> rows;
};

/// Reads a comma-separated file with a header row. Quoted fields may contain
/// commas, newlines and doubled quotes. Throws IoError if the file cannot be
/// opened and ValidationError on an unterminated quote.
Table read(const std::filesystem::path& path);

/// Parses CSV text; `origin` is used in error messages only.
Table parse(std::string_view text, const std::filesystem::path& origin);

/// Quotes a field only when it contains a delimiter, quote or line break.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest decimal representation that parses back to the same double.
std::string format_number(double value);

/// Strict decimal parse of a whole field; returns false on trailing garbage,
/// empty input or non-finite results.
bool parse_number(std::string_view text, double& value);

}  // namespace taskprob::csv
