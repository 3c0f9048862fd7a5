#ifndef ONE_ERRORS_HPP
#define ONE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace one {

/// Base for every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input line. Carries the 1-based line number (0 when unknown).
class ParseError : public Error {
public:
  ParseError(const std::string& where, std::size_t line, const std::string& what)
      : Error(where + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class IoError : public Error {
public:
  using Error::Error;
};

/// Input files disagree with each other (row counts, unknown node ids, ...).
class ConsistencyError : public Error {
public:
  using Error::Error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Non-finite values produced during optimization.
class NumericError : public Error {
public:
  using Error::Error;
};

/// Operation requires state the object does not have (e.g. labels).
class StateError : public Error {
public:
  using Error::Error;
};

}  // namespace one

#endif  // ONE_ERRORS_HPP
