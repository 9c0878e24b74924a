#pragma once

#include <stdexcept>

namespace costaudit {

// Base class for recoverable failures. The CLI maps these to exit code 1;
// anything else escaping main is an internal bug and exits with 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File missing, unreadable, or unwritable.
class IoError : public Error {
public:
    using Error::Error;
};

// Malformed input. Messages carry the source name and line/row number.
class ParseError : public Error {
public:
    using Error::Error;
};

// Domain invariant violated: duplicate id, negative price, thinking > output.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Lookup failed: unknown model, empty cell, no repeated trials.
class NotFoundError : public Error {
public:
    using Error::Error;
};

}  // namespace costaudit
