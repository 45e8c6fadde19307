#include "taskprob/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "taskprob/error.hpp"

namespace taskprob::csv {

Table read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path);
}

Table parse(std::string_view text, const std::filesystem::path& origin) {
  Table table;
  table.path = origin;

  // Skip a UTF-8 byte order mark.
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") {
    text.remove_prefix(3);
  }

  std::size_t line = 1;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    Row row;
    row.line = line;
    std::string field;
    bool in_quotes = false;
    bool quoted = false;
    bool end_of_record = false;
    while (pos < text.size() && !end_of_record) {
      const char c = text[pos];
      if (in_quotes) {
        if (c == '"') {
          if (pos + 1 < text.size() && text[pos + 1] == '"') {
            field.push_back('"');
            ++pos;
          } else {
            in_quotes = false;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
        }
        ++pos;
        continue;
      }
      switch (c) {
        case '"':
          if (field.empty() && !quoted) {
            in_quotes = true;
            quoted = true;
          } else {
            field.push_back(c);
          }
          break;
        case ',':
          row.fields.push_back(std::move(field));
          field.clear();
          quoted = false;
          break;
        case '\r':
          break;
        case '\n':
          end_of_record = true;
          ++line;
          break;
        default:
          field.push_back(c);
      }
      ++pos;
    }
    if (in_quotes) {
      throw ValidationError(
          {Issue{origin.string(), row.line, "unterminated quoted field"}});
    }
    row.fields.push_back(std::move(field));

    // Blank lines carry no record.
    if (row.fields.size() == 1 && row.fields[0].empty() && !quoted) {
      continue;
    }
    if (first) {
      table.header = std::move(row.fields);
      first = false;
    } else {
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

bool parse_number(std::string_view text, double& value) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end && std::isfinite(value);
}

}  // namespace taskprob::csv
