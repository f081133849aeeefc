#pragma once

#include <string>
#include <string_view>

namespace crowdaudit::text {

// UTF-8 in, UTF-8 out. Invalid sequences throw ValidationError.
std::string nfc(std::string_view utf8);

// Simple (per code point) lowercase mapping.
std::string lower(std::string_view utf8);

std::u32string to_u32(std::string_view utf8);
std::string to_utf8(std::u32string_view text);

// Number of Unicode code points.
std::size_t length(std::string_view utf8);

// Strips leading and trailing Unicode whitespace.
std::string trim(std::string_view utf8);

// Replaces every run of Unicode whitespace with one ASCII space and trims the ends.
std::string collapse_whitespace(std::string_view utf8);

}  // namespace crowdaudit::text
