#pragma once

#include <stdexcept>
#include <string>

namespace gft {

// Shapes of two operands do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A caller-supplied argument is out of range (k too large, bad label, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An API was used in a state it does not allow (non-scalar loss, double
// prompt injection, replaying a consumed tape).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// On-disk data is malformed or inconsistent with its own header.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public FormatError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : FormatError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace gft
