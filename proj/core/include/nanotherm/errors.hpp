#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nanotherm {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical or physical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A result would not be representable in double precision.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// Malformed tabular input. `row()` is the 1-based data row (0 for the header).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row)
        : Error(what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

/// Well-formed input that violates a documented invariant.
class InvariantError : public Error {
public:
    InvariantError(const std::string& what, std::string field, std::size_t row = 0)
        : Error(what), field_(std::move(field)), row_(row) {}
    const std::string& field() const noexcept { return field_; }
    std::size_t row() const noexcept { return row_; }

private:
    std::string field_;
    std::size_t row_;
};

/// A requested spectral or thermal range is not covered by the available data.
class CoverageError : public Error {
public:
    using Error::Error;
};

/// An iterative method did not reach its tolerance within its budget.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Invalid or incomplete run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A cached artefact does not match the request that tried to reuse it.
class CacheMismatchError : public Error {
public:
    using Error::Error;
};

}  // namespace nanotherm
