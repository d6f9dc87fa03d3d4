#pragma once

#include <stdexcept>
#include <string>

namespace coclust {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// A covariance matrix could not be Cholesky-factored.
class NotPositiveDefinite : public Error {
  public:
    using Error::Error;
};

/// A row cluster lost (almost) all of its posterior mass.
class EmptyCluster : public Error {
  public:
    EmptyCluster(int cluster, double mass)
        : Error("row cluster " + std::to_string(cluster + 1) +
                " collapsed (mass " + std::to_string(mass) + ")"),
          cluster(cluster), mass(mass) {}
    int cluster;
    double mass;
};

class AllRestartsFailed : public Error {
  public:
    using Error::Error;
};

class InstanceTooLarge : public Error {
  public:
    using Error::Error;
};

class LengthMismatch : public Error {
  public:
    using Error::Error;
};

class NonFinite : public Error {
  public:
    using Error::Error;
};

// I/O and validation errors raised by the command-line layer.

class ParseError : public Error {
  public:
    ParseError(const std::string& file, std::size_t line, std::size_t column,
               const std::string& what)
        : Error(file + ":" + std::to_string(line) + ":" +
                std::to_string(column) + ": " + what),
          line(line), column(column) {}
    std::size_t line;
    std::size_t column;
};

class DimensionMismatch : public Error {
  public:
    using Error::Error;
};

class NonBinaryValue : public Error {
  public:
    NonBinaryValue(std::size_t row, std::size_t col, const std::string& text)
        : Error("non-binary value '" + text + "' at row " +
                std::to_string(row + 1) + ", column " +
                std::to_string(col + 1)),
          row(row), col(col) {}
    std::size_t row;
    std::size_t col;
};

class ParamValidationError : public Error {
  public:
    using Error::Error;
};

} // namespace coclust
