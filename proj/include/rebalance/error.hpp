#pragma once

#include <stdexcept>
#include <string>

namespace rebalance {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition (bad k, empty class, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Malformed input data: unparseable cells, unknown labels, missing columns.
class DataError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

} // namespace rebalance
