#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hpmp {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of a trajectory, matrix or family disagree with the problem.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, std::size_t stage)
      : Error(what + " (stage " + std::to_string(stage) + ")"), stage_(stage) {}
  explicit DimensionError(const std::string& what)
      : Error(what), stage_(static_cast<std::size_t>(-1)) {}

  std::size_t stage() const { return stage_; }

 private:
  std::size_t stage_;
};

/// A function returned a non-finite value during differentiation.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Malformed problem or trajectory file.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& field, const std::string& what)
      : Error("line " + std::to_string(line) + ", field '" + field + "': " + what),
        line_(line),
        field_(field) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace hpmp
