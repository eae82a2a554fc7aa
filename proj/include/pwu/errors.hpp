#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pwu {

/// Dimension or layout mismatch between a model and its input.
class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed model, dataset, or report file.
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UnsupportedVersionError : public ParseError {
public:
  using ParseError::ParseError;
};

/// Request or argument that violates a documented precondition.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure (non-finite values, diverging training, solver trouble).
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class EmptyRegionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SamplingError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace pwu
