#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace erprop::csv {

/// Reads one RFC 4180 row (quoted fields may span lines). Returns nullopt at
/// end of input. Throws ParseError on an unterminated quote; `line` is the
/// 1-based line the row starts on and is advanced past it.
std::optional<std::vector<std::string>> read_row(std::istream& in, std::size_t& line);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace erprop::csv
