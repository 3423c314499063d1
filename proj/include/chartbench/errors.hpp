#pragma once

#include <stdexcept>
#include <string>

#include "chartbench/types.hpp"

namespace chartbench {

/// Precondition violations: bad sizes, out-of-range parameters, malformed input.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DisconnectedGraph : public std::runtime_error {
 public:
  explicit DisconnectedGraph(int components)
      : std::runtime_error("neighbor graph is disconnected (" + std::to_string(components) +
                           " components)"),
        components_(components) {}

  int components() const { return components_; }

 private:
  int components_;
};

/// Nystrom extension asked for a mode whose eigenvalue is too small to divide by.
class ModeExtensionError : public NumericalError {
 public:
  ModeExtensionError(Index mode, double lambda)
      : NumericalError("cannot extend mode " + std::to_string(mode) + ": eigenvalue " +
                       std::to_string(lambda) + " <= 1e-12"),
        mode_(mode) {}

  Index mode() const { return mode_; }

 private:
  Index mode_;
};

/// Input file does not match the schema of the command that should have produced it.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& what, std::string column)
      : std::runtime_error(what), column_(std::move(column)) {}

  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

}  // namespace chartbench
