#include "crowdaudit/csv.hpp"

#include <charconv>
#include <istream>
#include <system_error>

#include "crowdaudit/error.hpp"

namespace crowdaudit::csv {

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

namespace {

// Returns true when the record is complete.
bool split_into(std::string_view line, std::vector<std::string>& fields, bool& in_quotes) {
  if (!in_quotes) fields.emplace_back();
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          fields.back().push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        fields.back().push_back(c);
      }
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c == '"' && fields.back().empty()) {
      in_quotes = true;
    } else {
      fields.back().push_back(c);
    }
  }
  return !in_quotes;
}

}  // namespace

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  bool in_quotes = false;
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (!split_into(line, fields, in_quotes)) throw ValidationError("unterminated quoted CSV field");
  return fields;
}

bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& lines_consumed) {
  fields.clear();
  lines_consumed = 0;
  std::string line;
  bool in_quotes = false;
  while (std::getline(in, line)) {
    ++lines_consumed;
    std::string_view view = line;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (split_into(view, fields, in_quotes)) return true;
    fields.back().push_back('\n');
  }
  if (in_quotes) throw ValidationError("unterminated quoted CSV field at end of input");
  return lines_consumed > 0;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

}  // namespace crowdaudit::csv
