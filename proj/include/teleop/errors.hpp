#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace teleop {

class TeleopError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A tracked arm segment is shorter than epsilon.
class DegenerateSegment : public TeleopError {
 public:
  using TeleopError::TeleopError;
};

class DimensionMismatch : public TeleopError {
 public:
  using TeleopError::TeleopError;
};

class NonMonotonicTime : public TeleopError {
 public:
  using TeleopError::TeleopError;
};

class DomainError : public TeleopError {
 public:
  using TeleopError::TeleopError;
};

class InsufficientData : public TeleopError {
 public:
  using TeleopError::TeleopError;
};

/// A trial log with a goal that was shown but never achieved (or no goals at all).
class IncompleteTrial : public TeleopError {
 public:
  using TeleopError::TeleopError;
};

class ConfigError : public TeleopError {
 public:
  using TeleopError::TeleopError;
};

/// A listening port could not be bound.
class PortUnavailable : public TeleopError {
 public:
  using TeleopError::TeleopError;
};

/// Input text could not be parsed. Line and column are 1-based; column 0 means unknown.
class ParseError : public TeleopError {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& reason)
      : TeleopError("line " + std::to_string(line) +
                    (column ? ", column " + std::to_string(column) : std::string{}) + ": " +
                    reason),
        line_(line),
        column_(column),
        reason_(reason) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string reason_;
};

/// A record lacks a required field.
class SchemaError : public ParseError {
 public:
  SchemaError(std::size_t line, const std::string& field)
      : ParseError(line, 0, "missing field '" + field + "'"), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// A quaternion too far from unit norm to be re-normalized.
class NormError : public ParseError {
 public:
  NormError(std::size_t line, const std::string& field, double norm)
      : ParseError(line, 0,
                   "quaternion '" + field + "' has norm " + std::to_string(norm) +
                       " outside [0.99, 1.01]"),
        field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// The scripted operator could not find a pose satisfying a goal.
class Unreachable : public TeleopError {
 public:
  explicit Unreachable(std::size_t goal_index)
      : TeleopError("goal " + std::to_string(goal_index) + " is unreachable"),
        goal_index_(goal_index) {}
  std::size_t goal_index() const { return goal_index_; }

 private:
  std::size_t goal_index_;
};

}  // namespace teleop
