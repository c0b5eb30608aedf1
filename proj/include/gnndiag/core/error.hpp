#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gnndiag {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (JSON syntax, missing fields, wrong types).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Well-formed input that violates a data invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Raised by training when the loss stops being finite.
class NumericError : public Error {
public:
    NumericError(const std::string& what, std::size_t epoch) : Error(what), epoch_(epoch) {}
    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace gnndiag
