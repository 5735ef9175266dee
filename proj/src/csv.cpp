#include "erprop/csv.hpp"

#include <istream>
#include <ostream>

#include "erprop/error.hpp"

namespace erprop::csv {

std::optional<std::vector<std::string>> read_row(std::istream& in, std::size_t& line) {
  if (in.peek() == std::char_traits<char>::eof()) return std::nullopt;

  const std::size_t start_line = line;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool after_quote = false;
  char c;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      after_quote = false;
    } else if (c == '\n') {
      ++line;
      if (!field.empty() && field.back() == '\r' && !after_quote) field.pop_back();
      fields.push_back(std::move(field));
      return fields;
    } else if (c == '"' && field.empty() && !after_quote) {
      quoted = true;
    } else if (c == '\r' && after_quote) {
      // CRLF after a closing quote
    } else {
      if (after_quote) {
        throw ParseError("line " + std::to_string(start_line) + ": text after closing quote");
      }
      field.push_back(c);
    }
  }
  if (quoted) {
    throw ParseError("line " + std::to_string(start_line) + ": unterminated quoted field");
  }
  ++line;
  if (!field.empty() && field.back() == '\r' && !after_quote) field.pop_back();
  fields.push_back(std::move(field));
  return fields;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
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

}  // namespace erprop::csv
