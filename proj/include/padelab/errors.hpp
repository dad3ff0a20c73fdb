#pragma once

#include <stdexcept>
#include <string>

namespace padelab {

// Invalid input: violated precondition or invariant of a domain type.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Well-formed input outside the supported class (e.g. non-real segments).
class UnsupportedError : public DomainError {
public:
    using DomainError::DomainError;
};

// A numerical procedure failed (non-convergence, precision exhaustion,
// overflow, step underflow).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Configuration text could not be parsed or validated.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& msg, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

} // namespace padelab
