#pragma once

#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace phclust {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

/// Malformed or contract-violating input (bad CSV, broken invariants, bad flags).
class ValidationError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// Input is well formed but numerically degenerate (n < 3 for Mantel, zero variance, ...).
class NumericError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

using WarningHandler = std::function<void(std::string_view)>;

/// Process-wide sink for non-fatal warnings. Defaults to stderr.
inline WarningHandler& warning_handler() {
    static WarningHandler handler = [](std::string_view msg) {
        std::cerr << "warning: " << msg << '\n';
    };
    return handler;
}

inline void warn(std::string_view msg) {
    if (auto& h = warning_handler()) h(msg);
}

} // namespace phclust
