#pragma once

#include <stdexcept>
#include <string>

namespace pnp {

/// Base of every exception thrown by pnplab.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad shapes, malformed specs, out-of-range settings.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Caller misuse of an otherwise valid object (empty batch, wrong dataset kind).
class UsageError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation (e.g. t = 1 where 1/(1-t) is needed).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A frame with no positive pixel mass has no centroid.
class UndefinedCentroidError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Non-finite values or training divergence.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Failure to decode a persisted artifact (checkpoint, grid container).
class LoadError : public Error {
public:
    using Error::Error;
};

}  // namespace pnp
