#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qssvm {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Rejected TrainConfig (e.g. lambda on a non-L1 variant, zero set on the wrong variant).
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// A hard-margin formulation was asked to fit data it cannot separate.
class HardMarginInfeasible : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

class NotLinearlySeparable : public Error {
 public:
  using Error::Error;
};

class NotQuadraticallySeparable : public Error {
 public:
  using Error::Error;
};

class RejectionBudgetExceeded : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// CSV parse failure. Row and column are 1-based positions in the file.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& what)
      : Error("parse error at row " + std::to_string(row) + ", column " +
              std::to_string(column) + ": " + what),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class NotTwoClasses : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

}  // namespace qssvm
