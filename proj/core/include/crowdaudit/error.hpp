#pragma once

#include <stdexcept>
#include <string>

namespace crowdaudit {

// Failures reading or writing files, sockets or the response cache. The CLI
// maps these to exit code 1.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs that are well-formed bytes but violate a contract (bad record,
// dangling reference, precondition). The CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A malformed record at a known location.
class ParseError : public ValidationError {
 public:
  ParseError(std::string file, std::size_t line, std::string field, const std::string& what)
      : ValidationError(file + ":" + std::to_string(line) + (field.empty() ? "" : ": field '" + field + "'") +
                        ": " + what),
        file_(std::move(file)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string file_;
  std::size_t line_;
  std::string field_;
};

}  // namespace crowdaudit
