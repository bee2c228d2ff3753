#pragma once

#include <stdexcept>
#include <string>

namespace modeflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Two fields that must share a grid (or a length) do not.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A run or experiment was configured inconsistently.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input data violates a structural requirement (ordering, positivity, size).
class DataError : public Error {
public:
    using Error::Error;
};

/// The characteristic map folded over (the principal function went multivalued).
class CausticError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require(bool ok, const char* what)
{
    if (!ok) throw DomainError(what);
}

template <class E>
inline void require_as(bool ok, const std::string& what)
{
    if (!ok) throw E(what);
}

} // namespace detail
} // namespace modeflow
