#pragma once

#include <stdexcept>
#include <string>

namespace nomadet {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Inconsistent shapes or lengths between operands.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// API misuse (e.g. backward without a forward cache, bad config key).
class UsageError : public Error {
public:
    using Error::Error;
};

/// NaN/Inf encountered where a finite value is required.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Malformed or unreadable on-disk data.
class DataError : public Error {
public:
    using Error::Error;
};

class BadMagicError : public DataError {
public:
    using DataError::DataError;
};

class VersionMismatchError : public DataError {
public:
    using DataError::DataError;
};

class TruncatedError : public DataError {
public:
    using DataError::DataError;
};

}  // namespace nomadet
