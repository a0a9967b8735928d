#pragma once

#include <stdexcept>
#include <string>

namespace hypotax {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file. Carries "file:line: message" so callers can print it as-is.
struct ParseError : Error {
  ParseError(const std::string& file, std::size_t line, const std::string& msg)
      : Error(file + ":" + std::to_string(line) + ": " + msg),
        file(file),
        line(line) {}
  explicit ParseError(const std::string& msg) : Error(msg), line(0) {}

  std::string file;
  std::size_t line;
};

// A caller violated a documented precondition (overlapping spans, frozen
// dictionary mutation, missing gold labels, ...).
struct ContractError : Error {
  using Error::Error;
};

// Bad configuration: unknown key, out-of-range value, missing required path.
struct ConfigError : Error {
  using Error::Error;
};

// Numerical breakdown (non-finite objective, overflow) as opposed to bad input.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace hypotax
