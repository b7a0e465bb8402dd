#pragma once

#include <stdexcept>
#include <string>

namespace seqlab {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration: bad flag values, inapplicable parameters,
/// impossible fold counts. CLI exit code 2.
class ConfigError : public Error {
    using Error::Error;
};

/// Malformed or inconsistent input data. CLI exit code 3.
class DataError : public Error {
    using Error::Error;
};

/// Structural problems in a data file: wrong column count, missing header.
class SchemaError : public DataError {
    using DataError::DataError;
};

/// An operation was called with inputs violating its contract
/// (length or dimension mismatch, non-finite values). CLI exit code 3.
class InputError : public Error {
    using Error::Error;
};

/// Non-finite intermediates or failed numeric procedures. CLI exit code 4.
class NumericError : public Error {
    using Error::Error;
};

/// Model training failed: divergence, absent labels, degenerate clusters.
class TrainingError : public NumericError {
    using NumericError::NumericError;
};

/// An operation needs state the object does not have yet
/// (e.g. transforming with an untrained model). CLI exit code 2.
class StateError : public Error {
    using Error::Error;
};

}  // namespace seqlab
