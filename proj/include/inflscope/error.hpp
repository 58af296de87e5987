#pragma once

#include <stdexcept>
#include <string>

namespace inflscope {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad parameters or run configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input data cannot support the requested analysis (CLI exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

/// Malformed CSV input; the message names the offending line and column.
class IngestError : public DataError {
public:
    using DataError::DataError;
};

/// A value outside the domain of an operation, e.g. a non-positive level
/// passed to a log-ratio.
class DomainError : public DataError {
public:
    using DataError::DataError;
};

/// An iterative method failed to converge (CLI exit code 4).
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace inflscope
