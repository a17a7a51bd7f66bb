#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hyq {

// Comma-separated record handling with double-quote escaping, lenient the way
// the usual csv readers are: an unterminated quote runs to the end of the line.
std::vector<std::string> parse_csv_line(std::string_view line);

// Quotes the field when it contains a comma, a double quote, a newline, or any
// character in `also_quote_on`. Embedded quotes are doubled.
std::string csv_field(std::string_view value, std::string_view also_quote_on = "");

std::string csv_row(const std::vector<std::string>& fields, std::string_view also_quote_on = "");

} // namespace hyq
