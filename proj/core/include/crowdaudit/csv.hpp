#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace crowdaudit::csv {

// RFC 4180 quoting: fields containing a comma, quote, CR or LF are quoted.
std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

// Splits one CSV record. Throws ValidationError on an unterminated quote.
std::vector<std::string> split(std::string_view line);

// Reads the next logical record (quoted fields may span lines). Returns false
// at end of input. `lines_consumed` reports how many physical lines were read.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& lines_consumed);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

}  // namespace crowdaudit::csv
