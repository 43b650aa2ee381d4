#pragma once

#include <stdexcept>
#include <string>

namespace stinger {

// Errors that come from bad input (files, flags, parameters) derive from
// ValidationError; the CLI maps them to exit status 1. Everything else that
// escapes is a runtime failure (exit status 2).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class SchemaError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, std::size_t row);
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

class LabelError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InputError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ParameterError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Data does not support the requested fit (too few rows, degenerate range).
class DataError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Resampling strategy cannot be applied (e.g. only one class present).
class StrategyError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Rows passed to a fitted object do not match its fit-time layout.
class ContractError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class CurveError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class IoError : public Error {
public:
    using Error::Error;
};

class TrainingDivergence : public Error {
public:
    TrainingDivergence(const std::string& what, int epoch);
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

}  // namespace stinger
