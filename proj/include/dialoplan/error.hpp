#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dialoplan {

/// Malformed model: unground formula at evaluation time, overlapping outcome,
/// undeclared fluent, dangling plan reference.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax or declaration error in PDDL or formula text. Carries a 1-based
/// source position when one is known (0 otherwise).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line = 0, std::size_t column = 0)
      : std::runtime_error(line == 0 ? message
                                     : std::to_string(line) + ":" + std::to_string(column) +
                                           ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A configured budget (grounding cap, expansion count, wall time) was exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent runtime configuration, e.g. a plan fluent without an evaluation rule.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A domain-kit static check failed; emission is aborted.
class BuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dialoplan
