#pragma once

#include <stdexcept>
#include <string>

namespace mrekit {

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

/// Self-information of an impossible proposition.
class InfiniteInformationError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Vector/matrix sizes that do not line up.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

class NumericOverflowError : public Error {
public:
    using Error::Error;
};

} // namespace mrekit
