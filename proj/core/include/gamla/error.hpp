#pragma once

#include <stdexcept>
#include <string>

namespace gamla {

/// Base of every error thrown by the library. `category()` is a stable,
/// machine-parseable tag used by the command line front end.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* category() const noexcept { return "error"; }
};

/// Violated precondition: dimension mismatch, wrong phase, bad argument.
class ContractError : public Error {
public:
    using Error::Error;
    const char* category() const noexcept override { return "contract"; }
};

/// Malformed or truncated model / config / CSV document.
class SchemaError : public Error {
public:
    using Error::Error;
    const char* category() const noexcept override { return "schema"; }
};

/// File missing or unreadable.
class IoError : public Error {
public:
    using Error::Error;
    const char* category() const noexcept override { return "io"; }
};

/// Numerical failure: non-finite loss, singular point, degenerate chart.
class NumericError : public Error {
public:
    using Error::Error;
    const char* category() const noexcept override { return "numeric"; }
};

/// Training produced a non-finite loss. The network passed to `train` has
/// been restored to the last finite snapshot before this is thrown.
class DivergenceError : public NumericError {
public:
    using NumericError::NumericError;
    const char* category() const noexcept override { return "divergence"; }
};

class SingularPointError : public NumericError {
public:
    using NumericError::NumericError;
    const char* category() const noexcept override { return "singular-point"; }
};

class DegenerateChartError : public NumericError {
public:
    using NumericError::NumericError;
    const char* category() const noexcept override { return "degenerate-chart"; }
};

/// Emits a one-line warning on stderr unless warnings are silenced.
void warn(const std::string& message);
void set_warnings_enabled(bool enabled);

namespace detail {
inline void require(bool condition, const std::string& message) {
    if (!condition) throw ContractError(message);
}
} // namespace detail

} // namespace gamla
